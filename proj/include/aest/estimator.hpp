#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "aest/types.hpp"

namespace aest {

/// Relative error and failure probability of an (epsilon, delta)-approximation.
///
/// epsilon must lie in (0, 1) and delta in (0, 1). lambda = e - 2 is fixed.
class EstimationParams {
 public:
  static constexpr double lambda = std::numbers::e - 2.0;

  EstimationParams(double epsilon, double delta);

  double epsilon() const { return epsilon_; }
  double delta() const { return delta_; }

  friend bool operator==(const EstimationParams&, const EstimationParams&) = default;

 private:
  double epsilon_;
  double delta_;
};

/// 4 * lambda * ln(2 / delta) / epsilon^2
double gamma(const EstimationParams& params);

/// 1 + (1 + epsilon) * gamma
double gamma1(const EstimationParams& params);

/// The Gamma_1 composition for an already computed Gamma.
double gamma1_from_gamma(double gamma_value, double epsilon);

enum class Outcome : std::int8_t { no_response = -1, incorrect = 0, correct = 1 };

/// One observation <res, src, rnd>: the outcome of a test task requested by
/// `src` in round `rnd`.
struct ResultRecord {
  Outcome res = Outcome::no_response;
  ProcessorId src = 0;
  Round rnd = 0;

  friend bool operator==(const ResultRecord&, const ResultRecord&) = default;
};

/// Canonical replay order: rnd ascending, then src ascending, then res descending.
bool replay_order_less(const ResultRecord& a, const ResultRecord& b);

/// Estimate of one processor's correctness probability. Holds either a
/// positive value Gamma_1 / N, the crash sentinel -1, or "undetermined".
class EstimateValue {
 public:
  EstimateValue() = default;  // undetermined

  static EstimateValue crashed() { return EstimateValue(-1.0); }
  static EstimateValue undetermined() { return EstimateValue(); }
  static EstimateValue of(double value);

  bool is_crashed() const { return value_ == -1.0; }
  bool is_undetermined() const { return std::isnan(value_); }
  bool is_value() const { return value_ > 0.0; }

  /// -1 for crashed, NaN for undetermined.
  double raw() const { return value_; }
  double value() const;

  friend bool operator==(const EstimateValue& a, const EstimateValue& b) {
    return (a.is_undetermined() && b.is_undetermined()) || a.value_ == b.value_;
  }

 private:
  explicit EstimateValue(double v) : value_(v) {}
  double value_ = std::numeric_limits<double>::quiet_NaN();
};

/// Thrown when a sample stream ends before the running sum reaches Gamma_1.
class InsufficientSamples : public std::runtime_error {
 public:
  InsufficientSamples(double sum, std::uint64_t count);
  double sum() const { return sum_; }
  std::uint64_t count() const { return count_; }

 private:
  double sum_;
  std::uint64_t count_;
};

struct SraOutcome {
  double estimate;
  std::uint64_t trials;
};

/// Pull-based sample stream; std::nullopt marks exhaustion.
using SampleSource = std::function<std::optional<double>()>;

/// Stopping Rule Algorithm: draw Z_1, Z_2, ... until the running sum reaches
/// Gamma_1 and report (Gamma_1 / N, N).
SraOutcome sra_run(const SampleSource& source, const EstimationParams& params);

/// Estimate from a history of records about one target processor. Any
/// no-response record yields crashed(); otherwise the records are replayed in
/// canonical order and the estimate is Gamma_1 / N with N the longest prefix
/// whose correct-count stays below Gamma_1.
EstimateValue estimate_one(std::span<const ResultRecord> records,
                           const EstimationParams& params);
EstimateValue estimate_one_with_threshold(std::span<const ResultRecord> records,
                                          double gamma1_value);

/// Element-wise estimate_one over every processor id.
std::vector<EstimateValue> estimation(
    std::span<const std::vector<ResultRecord>> knowledge, const EstimationParams& params);

}  // namespace aest
