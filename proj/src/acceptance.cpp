#include "aest/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <tuple>

#include "aest/engine.hpp"
#include "aest/estimator.hpp"
#include "aest/metrics.hpp"
#include "aest/rng.hpp"
#include "aest/sweep.hpp"
#include "aest/trace.hpp"

namespace aest {

namespace {

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

struct Check {
  bool ok = true;
  std::vector<std::string> notes;

  void require(bool cond, std::string what) {
    if (!cond) ok = false;
    notes.push_back((cond ? "" : "FAILED ") + std::move(what));
  }
  std::string joined() const {
    std::string out;
    for (std::size_t k = 0; k < notes.size(); ++k) {
      if (k > 0) out += "; ";
      out += notes[k];
    }
    return out;
  }
};

// 1. Sequential estimator guarantee.
CriterionResult sra_guarantee() {
  const EstimationParams params(0.2, 0.05);
  const double g1 = gamma1(params);
  constexpr int kTrials = 2000;
  Check check;
  for (double p : {0.2, 0.5, 0.9}) {
    int in_band = 0;
    double total_trials = 0;
    for (int t = 0; t < kTrials; ++t) {
      auto rng = rng_stream(20240 + static_cast<std::uint64_t>(p * 10), static_cast<ProcessorId>(t),
                            0, StreamDomain::query);
      const auto out = sra_run([&]() -> std::optional<double> { return rng.bernoulli(p) ? 1.0 : 0.0; },
                               params);
      in_band += within_band(p, out.estimate, params.epsilon()) ? 1 : 0;
      total_trials += static_cast<double>(out.trials);
    }
    const double frac = in_band / static_cast<double>(kTrials);
    const double mean_trials = total_trials / kTrials;
    check.require(frac >= 0.93, fmt("p=%.1f in-band %.4f >= 0.93", p, frac));
    check.require(mean_trials <= 1.1 * g1 / p,
                  fmt("p=%.1f mean N %.1f <= %.1f", p, mean_trials, 1.1 * g1 / p));
  }
  return {1, "sequential estimator guarantee", check.ok, check.joined()};
}

// Straight-line reference for estimate_one: its own ordering key and its own
// threshold arithmetic, written without the library helpers.
EstimateValue oracle_estimate(const std::vector<ResultRecord>& records, double eps, double delta) {
  const double threshold =
      1.0 + (1.0 + eps) * (4.0 * (std::numbers::e - 2.0) * std::log(2.0 / delta) / (eps * eps));
  for (const auto& r : records) {
    if (static_cast<int>(r.res) == -1) return EstimateValue::crashed();
  }
  std::vector<std::tuple<Round, ProcessorId, int>> keys;
  for (const auto& r : records) keys.emplace_back(r.rnd, r.src, -static_cast<int>(r.res));
  std::sort(keys.begin(), keys.end());
  long sum = 0;
  for (std::size_t k = 0; k < keys.size(); ++k) {
    sum += -std::get<2>(keys[k]);
    if (static_cast<double>(sum) >= threshold) {
      if (k == 0) return EstimateValue::undetermined();
      return EstimateValue::of(threshold / static_cast<double>(k));
    }
  }
  return EstimateValue::undetermined();
}

// 2. Estimation subroutine against the oracle.
CriterionResult oracle_equivalence() {
  std::mt19937_64 gen(77);
  std::uniform_int_distribution<int> length(1, 5000);
  std::uniform_real_distribution<double> eps_dist(0.1, 0.9), delta_dist(0.01, 0.5), unit(0.0, 1.0);
  int mismatches = 0, crashed = 0, undetermined = 0, numeric = 0;
  for (int h = 0; h < 500; ++h) {
    const int len = length(gen);
    const double eps = eps_dist(gen);
    const double delta = delta_dist(gen);
    const double q = unit(gen);
    std::vector<ResultRecord> records;
    std::uniform_int_distribution<Round> rnd(0, static_cast<Round>(len));
    std::uniform_int_distribution<ProcessorId> src(0, 63);
    for (int k = 0; k < len; ++k) {
      records.push_back({unit(gen) < q ? Outcome::correct : Outcome::incorrect, src(gen), rnd(gen)});
    }
    if (h % 10 == 3) {
      records[static_cast<std::size_t>(gen() % records.size())].res = Outcome::no_response;
    }
    std::shuffle(records.begin(), records.end(), gen);
    const auto got = estimate_one(records, EstimationParams(eps, delta));
    const auto want = oracle_estimate(records, eps, delta);
    const bool same = (got.is_undetermined() && want.is_undetermined()) || got.raw() == want.raw();
    mismatches += same ? 0 : 1;
    crashed += want.is_crashed() ? 1 : 0;
    undetermined += want.is_undetermined() ? 1 : 0;
    numeric += want.is_value() ? 1 : 0;
  }
  const bool branches = crashed > 0 && undetermined > 0 && numeric > 0;
  return {2, "estimation oracle equivalence", mismatches == 0 && branches,
          fmt("500 histories, %d mismatches (numeric %d, undetermined %d, crashed %d)", mismatches,
              numeric, undetermined, crashed)};
}

// 3. End-to-end approximation without crashes.
CriterionResult end_to_end() {
  Check check;
  std::size_t live = 0, in_band = 0, undetermined = 0, incomplete = 0, unfinished = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    RunConfig c;
    c.n = 256;
    c.params = EstimationParams(0.5, 0.1);
    c.model = LinearFraction{0.0};
    c.crash_pattern = NoCrashes{};
    c.reliability = UniformReliability{0.3, 1.0};
    c.seed = seed;
    const auto r = run(c);
    if (r.completion != Completion::all_halted) ++unfinished;
    for (std::size_t i = 0; i < c.n; ++i) {
      if (!r.halt_rounds()[i] || r.estimates[i].size() != c.n) ++incomplete;
    }
    const auto acc = accuracy(r);
    live += acc.live_pairs;
    in_band += acc.within_band_pairs;
    undetermined += acc.undetermined;
  }
  const double frac = static_cast<double>(in_band) / static_cast<double>(live);
  check.require(unfinished == 0, fmt("%zu of 20 runs missed all_halted", unfinished));
  check.require(incomplete == 0, fmt("%zu processors without a full estimate array", incomplete));
  check.require(frac >= 1 - 0.1 - 0.03, fmt("pooled in-band %.4f >= 0.87 over %zu pairs", frac, live));
  check.require(undetermined == 0, fmt("undetermined %zu", undetermined));
  return {3, "end-to-end approximation", check.ok, check.joined()};
}

// 4. Crash detection under upfront crashes.
CriterionResult crash_detection() {
  Check check;
  std::size_t missed = 0, true_pos = 0, false_pos = 0, live_pairs = 0, unfinished = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RunConfig c;
    c.n = 128;
    c.params = EstimationParams(0.5, 0.1);
    c.model = LinearFraction{0.25};
    c.crash_pattern = UpfrontCrashes{};
    c.reliability = UniformReliability{0.5, 1.0};
    c.seed = seed;
    const auto r = run(c);
    if (r.completion != Completion::all_halted) ++unfinished;
    const auto acc = accuracy(r);
    missed += acc.missed_crashes;
    true_pos += acc.true_positives;
    false_pos += acc.false_positives;
    live_pairs += acc.live_pairs;
  }
  const double fp_rate = static_cast<double>(false_pos) / static_cast<double>(live_pairs);
  check.require(unfinished == 0, fmt("%zu of 10 runs missed all_halted", unfinished));
  check.require(missed == 0 && true_pos == 10 * 96 * 32,
                fmt("crashed targets marked -1 in %zu of %d pairs", true_pos, 10 * 96 * 32));
  check.require(fp_rate <= 0.02, fmt("false positives %zu / %zu = %.4f <= 0.02", false_pos,
                                     live_pairs, fp_rate));
  return {4, "crash detection", check.ok, check.joined()};
}

// 5. Time, work and message scaling under the linear-fraction model.
CriterionResult lf_scaling(const AcceptanceOptions& options) {
  ExperimentSpec spec;
  spec.grid = {128, 256, 512, 1024, 2048};
  spec.trials = 10;
  spec.base.params = EstimationParams(0.5, 0.1);
  spec.base.model = LinearFraction{0.25};
  spec.base.crash_pattern = UpfrontCrashes{};
  spec.base.reliability = UniformReliability{0.5, 1.0};
  spec.base.seed = 1;
  spec.delta_alpha = 1.0;  // delta = 1/n: the with-high-probability regime
  spec.jobs = options.jobs;
  const auto result = sweep(spec);

  std::vector<ScalingPoint> t, w, m;
  std::size_t completed = 0;
  for (const auto& a : result.aggregates) {
    const double n = static_cast<double>(a.n);
    t.push_back({n, a.T.mean});
    w.push_back({n, a.W.mean});
    m.push_back({n, a.M.mean});
    completed += a.completed;
  }
  const auto ft = scaling_fit(t, growth_log_n);
  const auto fw = scaling_fit(w, growth_n_log_n);
  const auto fm = scaling_fit(m, growth_n_log2_n);
  auto ratios = [](const ScalingReport& r) {
    std::string s;
    for (double x : r.ratios) s += (s.empty() ? "" : "/") + fmt("%.2f", x);
    return s;
  };
  Check check;
  check.require(completed == 50, fmt("%zu of 50 runs halted", completed));
  check.require(ft.max_deviation <= 0.35,
                fmt("T/log n %s dev %.3f <= 0.35", ratios(ft).c_str(), ft.max_deviation));
  check.require(fw.max_deviation <= 0.50,
                fmt("W/(n log n) %s dev %.3f <= 0.50", ratios(fw).c_str(), fw.max_deviation));
  check.require(fm.max_deviation <= 0.50,
                fmt("M/(n log^2 n) %s dev %.3f <= 0.50", ratios(fm).c_str(), fm.max_deviation));
  return {5, "linear-fraction complexity scaling", check.ok, check.joined()};
}

// 6. Fractional-polynomial model: superlogarithmic, sublinear time.
CriterionResult fp_behavior(const AcceptanceOptions& options) {
  ExperimentSpec spec;
  spec.grid = {256, 1024, 4096};
  spec.trials = 5;
  spec.base.params = EstimationParams(0.5, 0.1);
  spec.base.model = FractionalPolynomial{0.5, 1.0};
  spec.base.crash_pattern = UpfrontCrashes{};
  spec.base.reliability = UniformReliability{0.5, 1.0};
  spec.base.seed = 1;
  spec.jobs = options.jobs;
  // Every grid point runs under the round cap 8n.
  Check check;
  SweepResult result;
  for (auto n : spec.grid) {
    ExperimentSpec one = spec;
    one.grid = {n};
    one.base.max_rounds = static_cast<Round>(8 * n);
    auto part = sweep(one);
    result.trials.insert(result.trials.end(), part.trials.begin(), part.trials.end());
    result.aggregates.insert(result.aggregates.end(), part.aggregates.begin(), part.aggregates.end());
  }
  std::size_t completed = 0;
  std::string means;
  for (const auto& a : result.aggregates) {
    completed += a.completed;
    means += fmt("%sT(%zu)=%.0f", means.empty() ? "" : " ", a.n, a.T.mean);
  }
  const double first = result.aggregates.front().T.mean;
  const double last = result.aggregates.back().T.mean;
  const double ratio = last / first;
  const double log_ratio = std::log2(4096.0) / std::log2(256.0);
  check.require(completed == 15, fmt("%zu of 15 runs halted under 8n", completed));
  check.notes.push_back(means);
  check.require(ratio >= 2.0 && ratio <= 16.0 * log_ratio,
                fmt("T(4096)/T(256)=%.2f in [2, %.0f]", ratio, 16.0 * log_ratio));
  check.require(ratio > log_ratio && ratio < 4096.0 / 256.0,
                fmt("superlogarithmic (> %.1f) and sublinear (< 16)", log_ratio));
  bool rising = true;
  for (std::size_t k = 1; k < result.aggregates.size(); ++k) {
    const auto& a = result.aggregates[k - 1];
    const auto& b = result.aggregates[k];
    rising = rising && b.T_norm.mean > a.T_norm.mean;
  }
  check.require(rising, "T/log n increases along the grid");
  return {6, "fractional-polynomial behavior", check.ok, check.joined()};
}

// Checks protocol invariants on the event stream and per-round state.
class InvariantChecker : public RunObserver {
 public:
  explicit InvariantChecker(std::size_t n)
      : halted_(n, 0), crashed_(n, 0), enlightened_(n, 0), previous_(n) {}

  void on_event(const TraceEvent& e) override {
    if (e.kind != EventKind::drop && (halted_[e.id] != 0 || crashed_[e.id] != 0)) {
      fail("event from a halted or crashed processor");
    }
    switch (e.kind) {
      case EventKind::send:
        ++sends;
        if (e.message == MessageKind::profess && enlightened_[e.id] == 0) {
          fail("profess from an unenlightened processor");
        }
        if (e.message == MessageKind::share && e.level.value_or(0) != 0) {
          fail("share with a nonzero level");
        }
        break;
      case EventKind::receive: ++receives; break;
      case EventKind::drop: ++drops; break;
      case EventKind::enlighten:
        if (enlightened_[e.id] != 0) fail("enlightened twice");
        enlightened_[e.id] = 1;
        break;
      case EventKind::halt: halted_[e.id] = 1; break;
      case EventKind::crash: crashed_[e.id] = 1; break;
      case EventKind::ell_reset: break;
    }
  }

  void on_round_end(Round, std::span<const ProcessorState> states) override {
    for (const auto& s : states) {
      if (!s.enlightened && s.level != 0) fail("nonzero level while unenlightened");
      if (s.enlightened != (enlightened_[s.id] != 0)) fail("enlightenment without an event");
      const auto& now = s.knowledge.records();
      if (!now.is_superset_of(previous_[s.id])) fail("knowledge shrank");
      if (now.count() != previous_[s.id].count()) previous_[s.id] = now;
    }
  }

  void fail(const char* what) {
    if (violations.size() < 4) violations.emplace_back(what);
    ++violation_count;
  }

  std::uint64_t sends = 0, receives = 0, drops = 0, violation_count = 0;
  std::vector<std::string> violations;

 private:
  std::vector<std::uint8_t> halted_, crashed_, enlightened_;
  std::vector<RecordSet> previous_;
};

RunConfig random_config(std::uint64_t seed) {
  std::mt19937_64 gen(seed * 7919 + 13);
  auto pick = [&](std::size_t k) { return static_cast<std::size_t>(gen() % k); };
  RunConfig c;
  c.n = 1 + pick(64);
  c.seed = seed;
  const double eps[] = {0.3, 0.5, 0.8};
  const double delta[] = {0.05, 0.1, 0.3};
  c.params = EstimationParams(eps[pick(3)], delta[pick(3)]);
  switch (seed % 3) {
    case 0: c.model = LinearFraction{std::array{0.0, 0.1, 0.25, 0.5}[pick(4)]}; break;
    case 1: c.model = FractionalPolynomial{std::array{0.5, 0.75}[pick(2)], 1.0}; break;
    default: c.model = PolyLog{std::array{1.0, 2.0}[pick(2)], 1.0}; break;
  }
  try {
    min_survivors(c.model, c.n);
  } catch (const DomainError&) {
    c.model = PolyLog{1.0, 1.0};
  }
  switch (pick(3)) {
    case 0: c.crash_pattern = NoCrashes{}; break;
    case 1: c.crash_pattern = UpfrontCrashes{}; break;
    default: c.crash_pattern = SpreadCrashes{static_cast<Round>(1 + pick(64))}; break;
  }
  switch (pick(3)) {
    case 0: c.reliability = ConstantReliability{1.0}; break;
    case 1: c.reliability = UniformReliability{0.3, 1.0}; break;
    default: c.reliability = UniformReliability{0.5, 1.0}; break;
  }
  c.literal_ell_reset = seed % 7 == 0;
  return c;
}

std::uint64_t trace_hash(const RunConfig& c, std::optional<RunResult>* out = nullptr) {
  std::uint64_t h = 1469598103934665603ULL;
  TraceWriter writer(
      [&h](std::string_view line) {
        h = (h ^ std::hash<std::string_view>{}(line)) * 1099511628211ULL;
      },
      c);
  auto r = run(c, &writer);
  writer.finish(r);
  if (out != nullptr) out->emplace(std::move(r));
  return h;
}

// 7. Protocol invariants over randomized configurations.
CriterionResult invariant_suite() {
  std::size_t failures = 0, replays = 0, runs = 0;
  std::string first;
  auto note = [&](std::uint64_t seed, const std::string& what) {
    ++failures;
    if (first.empty()) first = "seed " + std::to_string(seed) + ": " + what;
  };
  for (std::uint64_t seed = 1; seed <= 200; ++seed) {
    const auto c = random_config(seed);
    InvariantChecker checker(c.n);
    const auto r = run(c, &checker);
    ++runs;
    const auto& m = r.metrics;
    if (checker.violation_count > 0) note(seed, checker.violations.front());
    if (checker.sends != m.messages_total) note(seed, "send events differ from messages_total");
    if (checker.receives + checker.drops != m.messages_total) note(seed, "receive and drop events differ from messages_total");
    if (!m.ledger_balanced()) note(seed, "message ledger unbalanced");
    if (checker.drops != m.dropped_to_crashed + m.dropped_to_halted) note(seed, "drop events differ from the drop counters");

    std::optional<RunResult> again;
    const auto h1 = trace_hash(c, &again);
    const auto h2 = trace_hash(c);
    if (h1 != h2 || again->metrics.messages_total != m.messages_total ||
        again->metrics.rounds_to_all_halt != m.rounds_to_all_halt) {
      note(seed, "rerun differs");
    }
    if (seed % 10 == 0) {
      std::stringstream buf;
      run_traced(c, buf);
      const auto rep = replay_trace(buf);
      ++replays;
      if (!rep.identical) note(seed, "replay differs at line " + std::to_string(rep.first_mismatch_line.value_or(0)));
    }
  }
  return {7, "protocol invariant suite", failures == 0,
          fmt("%zu runs, %zu trace replays, %zu violations", runs, replays, failures) +
              (first.empty() ? "" : "; first: " + first)};
}

// 8. Degenerate configurations.
CriterionResult degenerate() {
  Check check;
  const EstimationParams params(0.5, 0.1);
  const double g1 = gamma1(params);
  const double upper = g1 / std::floor(g1);
  const double eps_hat = upper - 1.0;
  auto in_band = [&](double v) { return v >= 1.0 / (1.0 + eps_hat) && v <= 1.0 + eps_hat; };

  RunConfig single;
  single.n = 1;
  single.params = params;
  single.model = LinearFraction{0.0};
  single.crash_pattern = NoCrashes{};
  single.reliability = ConstantReliability{1.0};
  const auto r1 = run(single);
  const bool halted = r1.completion == Completion::all_halted && r1.halt_rounds()[0].has_value();
  check.require(halted && r1.estimates[0].size() == 1 && r1.estimates[0][0].is_value() &&
                    in_band(r1.estimates[0][0].value()),
                fmt("n=1 halts at round %u with estimate %.6f in [%.6f, %.6f]",
                    r1.halt_rounds()[0].value_or(0),
                    r1.estimates[0].empty() ? 0.0 : r1.estimates[0][0].raw(), 1.0 / upper, upper));

  // All p = 1, no crashes: every numeric estimate must sit in the quantized
  // band. Request-cap drops can still produce -1 marks for live targets;
  // those are counted and must be matched by recorded false detections.
  std::size_t numeric = 0, out_of_band = 0, marks = 0, undetermined = 0, unexplained = 0;
  double lo = 1e9, hi = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    RunConfig c = single;
    c.n = 64;
    c.seed = seed;
    const auto r = run(c);
    if (r.completion != Completion::all_halted) ++unexplained;
    std::size_t run_marks = 0;
    for (const auto& row : r.estimates) {
      for (const auto& e : row) {
        if (e.is_value()) {
          ++numeric;
          lo = std::min(lo, e.value());
          hi = std::max(hi, e.value());
          if (!in_band(e.value()) || e.value() < 1.0) ++out_of_band;
        } else if (e.is_crashed()) {
          ++run_marks;
        } else {
          ++undetermined;
        }
      }
    }
    if (run_marks > 0 && r.metrics.false_crash_detections == 0) ++unexplained;
    marks += run_marks;
  }
  check.require(out_of_band == 0, fmt("p=1 n=64 x10: %zu numeric estimates in [%.6f, %.6f], %zu outside [1, %.6f]",
                                      numeric, lo, hi, out_of_band, upper));
  check.require(undetermined == 0, fmt("undetermined %zu", undetermined));
  check.require(unexplained == 0,
                fmt("%zu -1 marks, all from request-cap false detections", marks));
  return {8, "degenerate cases", check.ok, check.joined()};
}

}  // namespace

CriterionResult run_criterion(int id, const AcceptanceOptions& options) {
  const auto start = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    switch (id) {
      case 1: r = sra_guarantee(); break;
      case 2: r = oracle_equivalence(); break;
      case 3: r = end_to_end(); break;
      case 4: r = crash_detection(); break;
      case 5: r = lf_scaling(options); break;
      case 6: r = fp_behavior(options); break;
      case 7: r = invariant_suite(); break;
      case 8: r = degenerate(); break;
      default: throw DomainError("no criterion " + std::to_string(id));
    }
  } catch (const DomainError&) {
    throw;
  } catch (const std::exception& e) {
    r = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what()};
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const AcceptanceOptions& options) {
  std::vector<CriterionResult> out;
  for (int id : ids) out.push_back(run_criterion(id, options));
  return out;
}

std::string format_result(const CriterionResult& r) {
  return fmt("criterion %d %s %s (%.1fs): ", r.id, r.passed ? "PASS" : "FAIL", r.name.c_str(),
             r.seconds) +
         r.detail;
}

}  // namespace aest
