#include <doctest.h>

#include <cmath>

#include "aest/metrics.hpp"

using namespace aest;

TEST_CASE("band arithmetic") {
  // Exactly representable edges are inside the closed band.
  CHECK(within_band(0.5, 0.375, 0.25));
  CHECK(within_band(0.5, 0.625, 0.25));
  CHECK(within_band(0.8, 0.78, 0.2));
  CHECK_FALSE(within_band(0.5, 0.37, 0.25));
  CHECK_FALSE(within_band(0.8, 0.97, 0.2));
}

TEST_CASE("accuracy scoring") {
  const EstimationParams params(0.2, 0.1);
  const ReliabilityAssignment truth({0.8, 0.5, 0.9});
  CrashSchedule schedule(3);
  schedule.set_crash(2, 0);
  // Observer 0 halted; observer 1 halted; observer 2 crashed and has nothing.
  std::vector<std::vector<EstimateValue>> est = {
      {EstimateValue::of(0.78), EstimateValue::crashed(), EstimateValue::crashed()},
      {EstimateValue::of(0.5), EstimateValue::of(0.52), EstimateValue::of(0.9)},
      {}};
  std::vector<std::optional<Round>> halts = {Round{10}, Round{12}, std::nullopt};
  const auto r = accuracy(est, halts, truth, schedule, params);
  CHECK(r.live_pairs == 4);
  CHECK(r.within_band_pairs == 2);
  CHECK(r.false_positives == 1);
  CHECK(r.crashed_pairs == 2);
  CHECK(r.true_positives == 1);
  CHECK(r.missed_crashes == 1);
  CHECK(r.fraction_within_band == doctest::Approx(0.5));
  CHECK(r.targets[2].crashed);
}

TEST_CASE("scaling_fit on exact logarithmic data") {
  std::vector<ScalingPoint> s;
  for (double n : {256.0, 1024.0, 4096.0}) s.push_back({n, 7.0 * std::log2(n)});
  const auto r = scaling_fit(s, growth_log_n);
  for (double x : r.normalized) CHECK(x == doctest::Approx(1.0));
  CHECK(r.max_deviation == doctest::Approx(0.0));
  CHECK_FALSE(r.superlinear_residual);
  CHECK_FALSE(r.sublinear_residual);
}

TEST_CASE("scaling_fit flags quadratic work against n log n") {
  std::vector<ScalingPoint> s;
  for (double n : {128.0, 512.0, 2048.0}) s.push_back({n, n * n});
  const auto r = scaling_fit(s, growth_n_log_n);
  CHECK(r.superlinear_residual);
  CHECK(r.residual_slope > 0.7);
}

TEST_CASE("scaling_fit input checks") {
  std::vector<ScalingPoint> two = {{1, 1}, {2, 2}};
  CHECK_THROWS_AS(scaling_fit(two, growth_log_n), DomainError);
  std::vector<ScalingPoint> same = {{4, 1}, {4, 2}, {4, 3}};
  CHECK_THROWS_AS(scaling_fit(same, growth_log_n), DomainError);
}
