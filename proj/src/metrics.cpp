#include "aest/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace aest {

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::query: return "query";
    case Stage::response: return "response";
    case Stage::gossip: return "gossip";
  }
  return "?";
}

std::string_view to_string(Step s) {
  switch (s) {
    case Step::send: return "send";
    case Step::receive: return "receive";
    case Step::compute: return "compute";
  }
  return "?";
}

std::string_view to_string(MessageKind k) {
  switch (k) {
    case MessageKind::request: return "request";
    case MessageKind::response: return "response";
    case MessageKind::share: return "share";
    case MessageKind::profess: return "profess";
  }
  return "?";
}

void account_step(RunMetrics& metrics, ProcessorId /*id*/, const StepClock& /*clock*/,
                  const MessageCounts& emitted, std::uint64_t tasks_done) {
  ++metrics.work_steps;
  for (std::size_t k = 0; k < emitted.size(); ++k) {
    metrics.messages_by_type[k] += emitted[k];
    metrics.messages_total += emitted[k];
  }
  metrics.tasks_executed += tasks_done;
}

AccuracyReport accuracy(const std::vector<std::vector<EstimateValue>>& estimates,
                        const std::vector<std::optional<Round>>& halt_rounds,
                        const ReliabilityAssignment& truth, const CrashSchedule& schedule,
                        const EstimationParams& params) {
  const std::size_t n = truth.size();
  AccuracyReport report;
  report.targets.resize(n);
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> numeric(n, 0);
  for (std::size_t j = 0; j < n; ++j) {
    report.targets[j].true_p = truth[static_cast<ProcessorId>(j)];
    report.targets[j].crashed = schedule.crash_round(static_cast<ProcessorId>(j)).has_value();
  }

  for (std::size_t i = 0; i < estimates.size(); ++i) {
    if (!halt_rounds[i] || estimates[i].size() != n) continue;
    const Round halted_at = *halt_rounds[i];
    for (std::size_t j = 0; j < n; ++j) {
      const auto id = static_cast<ProcessorId>(j);
      const EstimateValue& e = estimates[i][j];
      auto& t = report.targets[j];
      ++t.observers;
      const auto crash = schedule.crash_round(id);
      const bool crashed_for_observer = crash && *crash <= halted_at;
      if (e.is_crashed()) ++t.crash_marks;
      if (e.is_undetermined()) {
        ++t.undetermined;
        ++report.undetermined;
      }
      if (e.is_value()) {
        sums[j] += e.value();
        ++numeric[j];
      }
      if (crashed_for_observer) {
        ++report.crashed_pairs;
        if (e.is_crashed()) {
          ++report.true_positives;
        } else {
          ++report.missed_crashes;
        }
        continue;
      }
      ++report.live_pairs;
      if (e.is_crashed()) ++report.false_positives;
      if (e.is_value() && within_band(t.true_p, e.value(), params.epsilon())) {
        ++t.within_band;
        ++report.within_band_pairs;
      }
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    if (numeric[j] > 0) report.targets[j].mean_estimate = sums[j] / static_cast<double>(numeric[j]);
  }
  report.fraction_within_band =
      report.live_pairs == 0
          ? 0.0
          : static_cast<double>(report.within_band_pairs) / static_cast<double>(report.live_pairs);
  return report;
}

double growth_log_n(double n) { return std::log2(n); }
double growth_n_log_n(double n) { return n * std::log2(n); }
double growth_n_log2_n(double n) { return n * std::log2(n) * std::log2(n); }

ScalingReport scaling_fit(std::span<const ScalingPoint> series,
                          const std::function<double(double)>& model, double slope_tolerance) {
  if (series.size() < 3) throw DomainError("scaling_fit needs at least 3 points");
  ScalingReport r;
  for (const auto& p : series) {
    const double m = model(p.n);
    if (!(m > 0.0) || !(p.n > 0.0)) throw DomainError("scaling model must be positive");
    r.ratios.push_back(p.value / m);
  }
  const double mean = std::accumulate(r.ratios.begin(), r.ratios.end(), 0.0) /
                      static_cast<double>(r.ratios.size());
  for (std::size_t k = 0; k < r.ratios.size(); ++k) {
    r.normalized.push_back(r.ratios[k] / mean);
    r.max_deviation = std::max(r.max_deviation, std::abs(r.normalized.back() - 1.0));
    if (k > 0) r.successive.push_back(r.ratios[k] / r.ratios[k - 1]);
  }

  // Least squares of log(ratio) on log(n).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < series.size(); ++k) {
    const double x = std::log(series[k].n);
    const double y = std::log(r.ratios[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto cnt = static_cast<double>(series.size());
  const double denom = cnt * sxx - sx * sx;
  const bool distinct = std::any_of(series.begin(), series.end(),
                                    [&](const ScalingPoint& p) { return p.n != series[0].n; });
  if (!distinct || denom == 0.0) throw DomainError("scaling_fit needs distinct n values");
  r.residual_slope = (cnt * sxy - sx * sy) / denom;
  r.superlinear_residual = r.residual_slope > slope_tolerance;
  r.sublinear_residual = r.residual_slope < -slope_tolerance;
  return r;
}

}  // namespace aest
