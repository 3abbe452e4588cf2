#include "aest/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aest/rng.hpp"

namespace aest {

namespace {

void check_probability(double p) {
  if (!(p > 0.0 && p <= 1.0)) {
    throw DomainError("reliability must lie in (0, 1], got " + std::to_string(p));
  }
}

double survivor_bound(const AdversaryModel& model, std::size_t n) {
  const double nd = static_cast<double>(n);
  return std::visit(
      [&](const auto& m) -> double {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearFraction>) {
          return (1.0 - m.f) * nd;
        } else if constexpr (std::is_same_v<M, FractionalPolynomial>) {
          return m.coeff * std::pow(nd, m.a);
        } else {
          return m.coeff * std::pow(std::log2(nd), m.c);
        }
      },
      model);
}

// Absorbs rounding noise such as (1 - 0.25) * 256 landing a hair above 192.
constexpr double kBoundSlack = 1e-9;

}  // namespace

ReliabilityAssignment::ReliabilityAssignment(std::vector<double> p) : p_(std::move(p)) {
  for (double v : p_) check_probability(v);
}

ReliabilityAssignment assign_probabilities(std::size_t n, const ReliabilitySpec& spec,
                                           std::uint64_t seed) {
  return std::visit(
      [&](const auto& s) -> ReliabilityAssignment {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ConstantReliability>) {
          check_probability(s.p);
          return ReliabilityAssignment(std::vector<double>(n, s.p));
        } else if constexpr (std::is_same_v<S, UniformReliability>) {
          check_probability(s.lo);
          check_probability(s.hi);
          if (s.lo > s.hi) throw DomainError("uniform reliability needs lo <= hi");
          std::vector<double> p(n);
          for (std::size_t i = 0; i < n; ++i) {
            auto rng = rng_stream(seed, static_cast<ProcessorId>(i), 0,
                                  StreamDomain::adversary_probabilities);
            // unit() is in [0, 1); flip it so lo > 0 is never undershot.
            p[i] = s.hi - (s.hi - s.lo) * rng.unit();
          }
          return ReliabilityAssignment(std::move(p));
        } else {
          if (s.p.size() != n) {
            throw DomainError("explicit reliability list has " + std::to_string(s.p.size()) +
                              " entries for n = " + std::to_string(n));
          }
          return ReliabilityAssignment(s.p);
        }
      },
      spec);
}

void validate_model(const AdversaryModel& model) {
  std::visit(
      [](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, LinearFraction>) {
          if (!(m.f >= 0.0 && m.f < 1.0)) throw DomainError("lf model needs f in [0, 1)");
        } else if constexpr (std::is_same_v<M, FractionalPolynomial>) {
          if (!(m.a > 0.0 && m.a < 1.0)) throw DomainError("fp model needs a in (0, 1)");
          if (!(m.coeff > 0.0)) throw DomainError("fp model needs coeff > 0");
        } else {
          if (!(m.c >= 1.0)) throw DomainError("pl model needs c >= 1");
          if (!(m.coeff > 0.0)) throw DomainError("pl model needs coeff > 0");
        }
      },
      model);
}

std::string model_name(const AdversaryModel& model) {
  switch (model.index()) {
    case 0: return "lf";
    case 1: return "fp";
    default: return "pl";
  }
}

std::size_t min_survivors(const AdversaryModel& model, std::size_t n) {
  validate_model(model);
  if (n == 0) throw DomainError("n must be at least 1");
  const double bound = survivor_bound(model, n);
  if (bound > static_cast<double>(n) + kBoundSlack) {
    throw DomainError(model_name(model) + " model needs " + std::to_string(bound) +
                      " survivors but n = " + std::to_string(n));
  }
  const auto need = static_cast<std::size_t>(std::ceil(bound - kBoundSlack));
  return std::clamp<std::size_t>(need, 1, n);
}

void CrashSchedule::set_crash(ProcessorId id, Round round) {
  if (id >= crash_round_.size()) throw DomainError("crash entry for unknown processor");
  crash_round_[id] = round;
}

std::size_t CrashSchedule::crash_count() const {
  return static_cast<std::size_t>(
      std::ranges::count_if(crash_round_, [](const auto& r) { return r.has_value(); }));
}

CrashSchedule generate_crash_schedule(std::size_t n, const AdversaryModel& model,
                                      const CrashPattern& pattern, std::uint64_t seed) {
  const std::size_t keep = min_survivors(model, n);
  CrashSchedule schedule(n);
  if (std::holds_alternative<NoCrashes>(pattern)) return schedule;
  if (const auto* spread = std::get_if<SpreadCrashes>(&pattern); spread && spread->rounds == 0) {
    throw DomainError("spread crash pattern needs at least one round");
  }

  const std::size_t crashes = n - keep;
  auto rng = rng_stream(seed, 0, 0, StreamDomain::adversary_crashes);
  std::vector<ProcessorId> ids(n);
  std::iota(ids.begin(), ids.end(), ProcessorId{0});
  for (std::size_t k = 0; k < crashes; ++k) {
    const auto pick = k + static_cast<std::size_t>(rng.uniform_index(n - k));
    std::swap(ids[k], ids[pick]);
  }
  for (std::size_t k = 0; k < crashes; ++k) {
    Round round = 0;
    if (const auto* spread = std::get_if<SpreadCrashes>(&pattern)) {
      round = static_cast<Round>(rng.uniform_index(spread->rounds));
    }
    schedule.set_crash(ids[k], round);
  }
  return schedule;
}

ScheduleReport validate_schedule(const CrashSchedule& schedule, const AdversaryModel& model,
                                 std::size_t n) {
  const std::size_t survivors = n - std::min(n, schedule.crash_count());
  const double required = survivor_bound(model, n);
  const double margin = static_cast<double>(survivors) - required;
  return {margin >= -kBoundSlack && survivors >= 1, survivors, required, margin};
}

bool is_live(const CrashSchedule& schedule, ProcessorId id, Round round) {
  const auto r = schedule.crash_round(id);
  return !r || *r > round;
}

}  // namespace aest
