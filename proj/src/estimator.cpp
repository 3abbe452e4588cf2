#include "aest/estimator.hpp"

#include <algorithm>
#include <string>

namespace aest {

EstimationParams::EstimationParams(double epsilon, double delta)
    : epsilon_(epsilon), delta_(delta) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) {
    throw DomainError("epsilon must lie in (0, 1), got " + std::to_string(epsilon));
  }
  if (!(delta > 0.0 && delta < 1.0)) {
    throw DomainError("delta must lie in (0, 1), got " + std::to_string(delta));
  }
}

double gamma(const EstimationParams& params) {
  const double eps = params.epsilon();
  return 4.0 * EstimationParams::lambda * std::log(2.0 / params.delta()) / (eps * eps);
}

double gamma1_from_gamma(double gamma_value, double epsilon) {
  return 1.0 + (1.0 + epsilon) * gamma_value;
}

double gamma1(const EstimationParams& params) {
  return gamma1_from_gamma(gamma(params), params.epsilon());
}

bool replay_order_less(const ResultRecord& a, const ResultRecord& b) {
  if (a.rnd != b.rnd) return a.rnd < b.rnd;
  if (a.src != b.src) return a.src < b.src;
  return static_cast<int>(a.res) > static_cast<int>(b.res);
}

EstimateValue EstimateValue::of(double value) {
  if (!(value > 0.0)) throw DomainError("estimate must be positive");
  return EstimateValue(value);
}

double EstimateValue::value() const {
  if (!is_value()) throw std::logic_error("estimate holds no numeric value");
  return value_;
}

InsufficientSamples::InsufficientSamples(double sum, std::uint64_t count)
    : std::runtime_error("sample stream exhausted at sum " + std::to_string(sum) +
                         " after " + std::to_string(count) + " samples"),
      sum_(sum),
      count_(count) {}

SraOutcome sra_run(const SampleSource& source, const EstimationParams& params) {
  const double threshold = gamma1(params);
  std::uint64_t n = 0;
  double sum = 0.0;
  while (sum < threshold) {
    const auto z = source();
    if (!z) throw InsufficientSamples(sum, n);
    if (!(*z >= 0.0 && *z <= 1.0)) throw DomainError("sample outside [0, 1]");
    ++n;
    sum += *z;
  }
  return {threshold / static_cast<double>(n), n};
}

EstimateValue estimate_one_with_threshold(std::span<const ResultRecord> records,
                                          double gamma1_value) {
  if (std::ranges::any_of(records, [](const ResultRecord& r) {
        return r.res == Outcome::no_response;
      })) {
    return EstimateValue::crashed();
  }
  std::vector<ResultRecord> sorted(records.begin(), records.end());
  std::ranges::sort(sorted, replay_order_less);

  // The prefix length just before the running sum first reaches gamma1.
  std::uint64_t sum = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    sum += sorted[k].res == Outcome::correct ? 1 : 0;
    if (static_cast<double>(sum) >= gamma1_value) {
      if (k == 0) return EstimateValue::undetermined();
      return EstimateValue::of(gamma1_value / static_cast<double>(k));
    }
  }
  return EstimateValue::undetermined();
}

EstimateValue estimate_one(std::span<const ResultRecord> records,
                           const EstimationParams& params) {
  return estimate_one_with_threshold(records, gamma1(params));
}

std::vector<EstimateValue> estimation(std::span<const std::vector<ResultRecord>> knowledge,
                                      const EstimationParams& params) {
  const double threshold = gamma1(params);
  std::vector<EstimateValue> out;
  out.reserve(knowledge.size());
  for (const auto& records : knowledge) {
    out.push_back(estimate_one_with_threshold(records, threshold));
  }
  return out;
}

}  // namespace aest
