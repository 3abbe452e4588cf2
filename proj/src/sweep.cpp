#include "aest/sweep.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <sstream>
#include <thread>

namespace aest {

namespace {

double parse_value(const std::string& text) {
  double v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw DomainError("bad sweep value '" + text + "'");
  }
  return v;
}

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  double sum = 0;
  for (double x : xs) sum += x;
  m.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

std::string num(double v) {
  std::ostringstream s;
  s << std::setprecision(10) << v;
  return s.str();
}

}  // namespace

std::string_view to_string(SweepDimension d) {
  switch (d) {
    case SweepDimension::none: return "none";
    case SweepDimension::model: return "model";
    case SweepDimension::epsilon: return "epsilon";
    case SweepDimension::delta: return "delta";
    case SweepDimension::f: return "f";
  }
  return "?";
}

SweepDimension parse_sweep_dimension(std::string_view text) {
  for (auto d : {SweepDimension::none, SweepDimension::model, SweepDimension::epsilon,
                 SweepDimension::delta, SweepDimension::f}) {
    if (to_string(d) == text) return d;
  }
  throw DomainError("unknown sweep dimension '" + std::string(text) + "'");
}

RunConfig point_config(const ExperimentSpec& spec, const std::string& value, std::size_t n,
                       std::size_t trial) {
  RunConfig c = spec.base;
  c.n = n;
  c.seed = spec.base.seed + trial;
  double eps = c.params.epsilon();
  double delta = c.params.delta();
  if (spec.delta_alpha) delta = std::pow(static_cast<double>(n), -*spec.delta_alpha);
  switch (spec.dimension) {
    case SweepDimension::none:
      break;
    case SweepDimension::model: {
      Json overlay;
      overlay["model"] = value;
      c = config_from_json(overlay, c);
      break;
    }
    case SweepDimension::epsilon:
      eps = parse_value(value);
      break;
    case SweepDimension::delta:
      delta = parse_value(value);
      break;
    case SweepDimension::f:
      if (!std::holds_alternative<LinearFraction>(c.model)) {
        throw DomainError("sweeping f needs the lf model");
      }
      c.model = LinearFraction{parse_value(value)};
      validate_model(c.model);
      break;
  }
  c.params = EstimationParams(eps, delta);
  return c;
}

void validate(const ExperimentSpec& spec) {
  if (spec.grid.empty()) throw DomainError("sweep grid is empty");
  for (std::size_t k = 1; k < spec.grid.size(); ++k) {
    if (spec.grid[k] <= spec.grid[k - 1]) {
      throw DomainError("sweep grid must be strictly increasing");
    }
  }
  if (spec.trials == 0) throw DomainError("trials must be at least 1");
  if (spec.jobs == 0) throw DomainError("jobs must be at least 1");
  if (spec.dimension != SweepDimension::none && spec.values.empty()) {
    throw DomainError("a sweep dimension needs at least one value");
  }
  if (spec.delta_alpha && spec.dimension == SweepDimension::delta) {
    throw DomainError("delta_alpha and a delta sweep are mutually exclusive");
  }
  if (spec.delta_alpha && !(*spec.delta_alpha > 0)) {
    throw DomainError("delta_alpha must be positive");
  }
  const std::vector<std::string> values =
      spec.dimension == SweepDimension::none ? std::vector<std::string>{""} : spec.values;
  for (const auto& v : values) {
    for (auto n : spec.grid) {
      try {
        validate(point_config(spec, v, n, 0));
      } catch (const DomainError& e) {
        std::string where = "sweep point n=" + std::to_string(n);
        if (!v.empty()) where += " " + std::string(to_string(spec.dimension)) + "=" + v;
        throw DomainError(where + ": " + e.what());
      }
    }
  }
}

SweepResult sweep(const ExperimentSpec& spec, const std::function<void(const TrialRow&)>& progress) {
  validate(spec);
  const std::vector<std::string> values =
      spec.dimension == SweepDimension::none ? std::vector<std::string>{""} : spec.values;

  struct Job {
    std::string value;
    std::size_t n;
    std::size_t trial;
  };
  std::vector<Job> jobs;
  for (const auto& v : values) {
    for (auto n : spec.grid) {
      for (std::size_t t = 0; t < spec.trials; ++t) jobs.push_back({v, n, t});
    }
  }

  SweepResult result;
  result.trials.resize(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  std::mutex progress_mutex;

  auto worker = [&] {
    for (std::size_t k = next++; k < jobs.size(); k = next++) {
      const auto& job = jobs[k];
      try {
        const RunConfig c = point_config(spec, job.value, job.n, job.trial);
        const auto r = run(c);
        const auto acc = accuracy(r);
        TrialRow row;
        row.value = job.value;
        row.n = job.n;
        row.trial = job.trial;
        row.seed = c.seed;
        row.completed = r.completion == Completion::all_halted;
        row.T = static_cast<double>(r.metrics.rounds_to_all_halt);
        row.W = static_cast<double>(r.metrics.work_steps);
        row.M = static_cast<double>(r.metrics.messages_total);
        row.in_band = acc.fraction_within_band;
        row.false_positives = acc.false_positives;
        row.undetermined = acc.undetermined;
        row.false_crash_detections = r.metrics.false_crash_detections;
        result.trials[k] = row;
        if (progress) {
          std::lock_guard lock(progress_mutex);
          progress(row);
        }
      } catch (const std::exception& e) {
        std::string where = "sweep point n=" + std::to_string(job.n) +
                            " trial=" + std::to_string(job.trial);
        if (!job.value.empty()) where += " " + std::string(to_string(spec.dimension)) + "=" + job.value;
        errors[k] = std::make_exception_ptr(std::runtime_error(where + ": " + e.what()));
      }
    }
  };

  const unsigned threads = std::min<std::size_t>(spec.jobs, jobs.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t k = 0;
  for (const auto& v : values) {
    for (auto n : spec.grid) {
      const double log_n = std::max(1.0, std::log2(static_cast<double>(n)));
      const double nd = static_cast<double>(n);
      std::vector<double> T, W, M, Tn, Wn, Mn, band;
      AggregateRow agg;
      agg.value = v;
      agg.n = n;
      agg.trials = spec.trials;
      for (std::size_t t = 0; t < spec.trials; ++t, ++k) {
        const auto& row = result.trials[k];
        agg.completed += row.completed ? 1 : 0;
        T.push_back(row.T);
        W.push_back(row.W);
        M.push_back(row.M);
        Tn.push_back(row.T / log_n);
        Wn.push_back(row.W / (nd * log_n));
        Mn.push_back(row.M / (nd * log_n * log_n));
        band.push_back(row.in_band);
        agg.false_positives += static_cast<double>(row.false_positives);
        agg.undetermined += static_cast<double>(row.undetermined);
        agg.false_crash_detections += static_cast<double>(row.false_crash_detections);
      }
      const auto cnt = static_cast<double>(spec.trials);
      agg.false_positives /= cnt;
      agg.undetermined /= cnt;
      agg.false_crash_detections /= cnt;
      agg.T = moments(T);
      agg.W = moments(W);
      agg.M = moments(M);
      agg.T_norm = moments(Tn);
      agg.W_norm = moments(Wn);
      agg.M_norm = moments(Mn);
      agg.in_band = moments(band);
      result.aggregates.push_back(agg);
    }
  }
  return result;
}

void write_csv(std::ostream& out, const ExperimentSpec& spec, const SweepResult& result) {
  out << "kind,vary,value,n,trial,seed,completed,T,W,M,T_norm,W_norm,M_norm,in_band,"
         "false_positives,undetermined,false_crash_detections,T_sd,W_sd,M_sd,in_band_sd\n";
  const std::string vary(to_string(spec.dimension));
  std::size_t k = 0;
  for (const auto& agg : result.aggregates) {
    const double log_n = std::max(1.0, std::log2(static_cast<double>(agg.n)));
    const double nd = static_cast<double>(agg.n);
    for (std::size_t t = 0; t < agg.trials; ++t, ++k) {
      const auto& r = result.trials[k];
      out << "trial," << vary << ',' << r.value << ',' << r.n << ',' << r.trial << ',' << r.seed
          << ',' << (r.completed ? 1 : 0) << ',' << num(r.T) << ',' << num(r.W) << ','
          << num(r.M) << ',' << num(r.T / log_n) << ',' << num(r.W / (nd * log_n)) << ','
          << num(r.M / (nd * log_n * log_n)) << ',' << num(r.in_band) << ','
          << r.false_positives << ',' << r.undetermined << ',' << r.false_crash_detections
          << ",,,,\n";
    }
    out << "mean," << vary << ',' << agg.value << ',' << agg.n << ",,," << agg.completed << ','
        << num(agg.T.mean) << ',' << num(agg.W.mean) << ',' << num(agg.M.mean) << ','
        << num(agg.T_norm.mean) << ',' << num(agg.W_norm.mean) << ',' << num(agg.M_norm.mean)
        << ',' << num(agg.in_band.mean) << ',' << num(agg.false_positives) << ','
        << num(agg.undetermined) << ',' << num(agg.false_crash_detections) << ','
        << num(agg.T.sd) << ',' << num(agg.W.sd) << ',' << num(agg.M.sd) << ','
        << num(agg.in_band.sd) << '\n';
  }
}

Json spec_to_json(const ExperimentSpec& spec) {
  Json j;
  j["schema"] = "aest-sweep/1";
  j["grid"] = spec.grid;
  j["trials"] = spec.trials;
  j["vary"] = to_string(spec.dimension);
  j["values"] = spec.values;
  if (spec.delta_alpha) {
    j["delta_alpha"] = *spec.delta_alpha;
  } else {
    j["delta_alpha"] = nullptr;
  }
  j["seed_rule"] = "base.seed + trial";
  j["base"] = config_to_json(spec.base);
  return j;
}

void write_sweep_outputs(const ExperimentSpec& spec, const SweepResult& result) {
  if (spec.out_dir.empty()) return;
  std::filesystem::create_directories(spec.out_dir);
  std::ofstream csv(spec.out_dir / "sweep.csv");
  write_csv(csv, spec, result);
  std::ofstream js(spec.out_dir / "sweep.json");
  js << spec_to_json(spec).dump(2) << '\n';
  if (!csv || !js) throw std::runtime_error("cannot write sweep outputs to " + spec.out_dir.string());
}

}  // namespace aest
