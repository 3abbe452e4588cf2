#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "aest/adversary.hpp"
#include "aest/estimator.hpp"
#include "aest/types.hpp"

namespace aest {

enum class Stage : std::uint8_t { query = 0, response = 1, gossip = 2 };
enum class Step : std::uint8_t { send = 0, receive = 1, compute = 2 };
enum class MessageKind : std::uint8_t { request = 0, response = 1, share = 2, profess = 3 };

std::string_view to_string(Stage s);
std::string_view to_string(Step s);
std::string_view to_string(MessageKind k);

struct StepClock {
  Round round = 0;
  Stage stage = Stage::query;
  Step step = Step::send;
};

using MessageCounts = std::array<std::uint64_t, 4>;

/// Time, work and message accounting for one run. All counters are additive.
struct RunMetrics {
  std::uint64_t rounds_to_all_halt = 0;  // T
  std::uint64_t work_steps = 0;          // W
  std::uint64_t messages_total = 0;      // M
  MessageCounts messages_by_type{};
  std::uint64_t tasks_executed = 0;
  /// -1 records about processors that had not crashed: the request cap and
  /// queries to already halted processors both produce them.
  std::uint64_t false_crash_detections = 0;
  /// The part of false_crash_detections caused by a halted target.
  std::uint64_t halted_target_detections = 0;
  std::uint64_t dropped_requests = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_to_crashed = 0;
  std::uint64_t dropped_to_halted = 0;
  std::vector<std::optional<Round>> per_processor_halt_round;

  std::uint64_t messages(MessageKind k) const {
    return messages_by_type[static_cast<std::size_t>(k)];
  }
  /// messages_total == delivered + dropped_to_crashed + dropped_to_halted
  bool ledger_balanced() const {
    return messages_total == delivered + dropped_to_crashed + dropped_to_halted;
  }
};

/// One executed step of a live, unhalted processor.
void account_step(RunMetrics& metrics, ProcessorId id, const StepClock& clock,
                  const MessageCounts& emitted, std::uint64_t tasks_done);

inline bool within_band(double truth, double estimate, double epsilon) {
  return estimate >= truth * (1.0 - epsilon) && estimate <= truth * (1.0 + epsilon);
}

struct TargetAccuracy {
  double true_p = 0;
  bool crashed = false;  // has a crash entry in the schedule
  std::size_t observers = 0;
  std::size_t within_band = 0;
  std::size_t crash_marks = 0;
  std::size_t undetermined = 0;
  double mean_estimate = 0;  // over numeric estimates
};

struct AccuracyReport {
  std::vector<TargetAccuracy> targets;
  /// (observer, target) pairs where the target was live when the observer halted.
  std::size_t live_pairs = 0;
  std::size_t within_band_pairs = 0;
  double fraction_within_band = 0;
  std::size_t crashed_pairs = 0;
  std::size_t true_positives = 0;
  std::size_t false_positives = 0;
  std::size_t missed_crashes = 0;
  std::size_t undetermined = 0;
};

/// Scores every halted processor's estimate array against the hidden truth.
/// A target counts as crashed for an observer when it crashed no later than
/// the observer's halt round.
AccuracyReport accuracy(const std::vector<std::vector<EstimateValue>>& estimates,
                        const std::vector<std::optional<Round>>& halt_rounds,
                        const ReliabilityAssignment& truth, const CrashSchedule& schedule,
                        const EstimationParams& params);

struct ScalingPoint {
  double n;
  double value;
};

struct ScalingReport {
  std::vector<double> ratios;      // value / model(n)
  std::vector<double> normalized;  // ratios / mean ratio
  std::vector<double> successive;  // ratios[k] / ratios[k-1]
  double max_deviation = 0;        // max |normalized - 1|
  double residual_slope = 0;       // d log(ratio) / d log(n), least squares
  bool superlinear_residual = false;
  bool sublinear_residual = false;
};

double growth_log_n(double n);
double growth_n_log_n(double n);
double growth_n_log2_n(double n);

/// Compares measured means against a claimed growth model. Needs >= 3 points.
ScalingReport scaling_fit(std::span<const ScalingPoint> series,
                          const std::function<double(double)>& model,
                          double slope_tolerance = 0.25);

}  // namespace aest
