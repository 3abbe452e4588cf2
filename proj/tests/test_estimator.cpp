#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "aest/estimator.hpp"
#include "aest/rng.hpp"

using namespace aest;

namespace {

// Reference values from a 40-digit evaluation of 4(e-2)ln(2/delta)/eps^2.
constexpr double kGamma_05_01 = 34.42848088035413;
constexpr double kGamma1_05_01 = 52.64272132053120;
constexpr double kGamma_02_005 = 264.9655079265962;
constexpr double kGamma1_02_005 = 318.9586095119155;

std::vector<ResultRecord> ones(int count) {
  std::vector<ResultRecord> r;
  for (int k = 1; k <= count; ++k) r.push_back({Outcome::correct, 0, static_cast<Round>(k)});
  return r;
}

}  // namespace

TEST_CASE("parameter domain") {
  CHECK_THROWS_AS(EstimationParams(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(EstimationParams(0.0, 0.5), DomainError);
  CHECK_THROWS_AS(EstimationParams(0.5, 0.0), DomainError);
  CHECK_THROWS_AS(EstimationParams(0.5, 1.0), DomainError);
  CHECK_THROWS_AS(EstimationParams(std::nan(""), 0.1), DomainError);
  CHECK_NOTHROW(EstimationParams(0.5, 0.1));
}

TEST_CASE("thresholds match the high-precision reference") {
  const EstimationParams a(0.5, 0.1), b(0.2, 0.05);
  CHECK(gamma(a) == doctest::Approx(kGamma_05_01).epsilon(1e-12));
  CHECK(gamma1(a) == doctest::Approx(kGamma1_05_01).epsilon(1e-12));
  CHECK(gamma(b) == doctest::Approx(kGamma_02_005).epsilon(1e-12));
  CHECK(gamma1(b) == doctest::Approx(kGamma1_02_005).epsilon(1e-12));
  CHECK(gamma1_from_gamma(0.0, 0.5) == 1.0);
}

TEST_CASE("thresholds decrease in epsilon and delta") {
  double prev = 1e300;
  for (double e = 0.1; e < 0.95; e += 0.1) {
    const double g = gamma1(EstimationParams(e, 0.1));
    CHECK(g < prev);
    prev = g;
  }
  prev = 1e300;
  for (double d = 0.01; d < 0.95; d += 0.07) {
    const double g = gamma1(EstimationParams(0.5, d));
    CHECK(g < prev);
    prev = g;
  }
}

TEST_CASE("sra_run on a constant stream of ones stops at 53") {
  const EstimationParams p(0.5, 0.1);
  const auto out = sra_run([] { return std::optional<double>(1.0); }, p);
  CHECK(out.trials == 53);
  CHECK(out.estimate == doctest::Approx(kGamma1_05_01 / 53).epsilon(1e-12));
  CHECK(out.estimate == doctest::Approx(0.9932588928402113).epsilon(1e-12));
}

TEST_CASE("sra_run errors") {
  const EstimationParams p(0.5, 0.1);
  int left = 1000;
  CHECK_THROWS_AS(sra_run([&]() -> std::optional<double> {
                    if (left-- == 0) return std::nullopt;
                    return 0.0;
                  }, p),
                  InsufficientSamples);
  CHECK_THROWS_AS(sra_run([] { return std::optional<double>(1.5); }, p), DomainError);
}

TEST_CASE("sra_run Monte Carlo at p = 0.5") {
  const EstimationParams p(0.2, 0.05);
  constexpr int kReps = 10000;
  double sum = 0;
  int in_band = 0;
  for (int t = 0; t < kReps; ++t) {
    auto rng = rng_stream(99, static_cast<ProcessorId>(t), 0, StreamDomain::query);
    const auto out = sra_run([&] { return std::optional<double>(rng.bernoulli(0.5) ? 1.0 : 0.0); }, p);
    sum += out.estimate;
    in_band += (out.estimate >= 0.4 && out.estimate <= 0.6) ? 1 : 0;
  }
  const double mean = sum / kReps;
  CHECK(mean >= 0.45);
  CHECK(mean <= 0.55);
  CHECK(in_band >= 0.95 * kReps);
}

TEST_CASE("estimate_one examples") {
  const EstimationParams p(0.5, 0.1);
  SUBCASE("crash record wins") {
    auto r = ones(100);
    r.push_back({Outcome::no_response, 4, 7});
    CHECK(estimate_one(r, p).is_crashed());
  }
  SUBCASE("100 ones give Gamma_1 / 52") {
    const auto e = estimate_one(ones(100), p);
    REQUIRE(e.is_value());
    CHECK(e.value() == gamma1(p) / 52);
    CHECK(e.value() == doctest::Approx(1.0123600253948308).epsilon(1e-12));
  }
  SUBCASE("too few records") { CHECK(estimate_one(ones(10), p).is_undetermined()); }
  SUBCASE("exactly enough records") {
    CHECK(estimate_one(ones(53), p).is_value());
    CHECK(estimate_one(ones(52), p).is_undetermined());
  }
  SUBCASE("empty history") { CHECK(estimate_one({}, p).is_undetermined()); }
}

TEST_CASE("replayed estimate is the stopping rule shifted by one sample") {
  // Replaying a history equals running the stopping rule over it, except
  // that the divisor excludes the crossing sample.
  const EstimationParams p(0.3, 0.2);
  std::mt19937_64 gen(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<ResultRecord> r;
    std::bernoulli_distribution coin(0.2 + 0.7 * (t % 10) / 10.0);
    for (Round k = 0; k < 3000; ++k) r.push_back({coin(gen) ? Outcome::correct : Outcome::incorrect, 0, k});
    std::size_t idx = 0;
    const auto sra = sra_run([&]() -> std::optional<double> {
      if (idx == r.size()) return std::nullopt;
      return r[idx++].res == Outcome::correct ? 1.0 : 0.0;
    }, p);
    const auto e = estimate_one(r, p);
    REQUIRE(e.is_value());
    CHECK(e.value() == gamma1(p) / static_cast<double>(sra.trials - 1));
  }
}

TEST_CASE("estimate_one ignores input order") {
  const EstimationParams p(0.5, 0.1);
  std::mt19937_64 gen(11);
  std::vector<ResultRecord> r;
  for (Round k = 0; k < 400; ++k) {
    for (ProcessorId s = 0; s < 3; ++s) r.push_back({(gen() % 3) != 0 ? Outcome::correct : Outcome::incorrect, s, k});
  }
  const auto base = estimate_one(r, p);
  for (int t = 0; t < 20; ++t) {
    std::shuffle(r.begin(), r.end(), gen);
    CHECK(estimate_one(r, p) == base);
  }
}

TEST_CASE("replay order") {
  const ResultRecord a{Outcome::correct, 2, 1}, b{Outcome::incorrect, 1, 2}, c{Outcome::incorrect, 3, 1};
  CHECK(replay_order_less(a, b));
  CHECK(replay_order_less(a, c));
  const ResultRecord hi{Outcome::correct, 3, 1}, lo{Outcome::incorrect, 3, 1};
  CHECK(replay_order_less(hi, lo));
  CHECK_FALSE(replay_order_less(lo, hi));
}

TEST_CASE("estimation over processors") {
  const EstimationParams p(0.5, 0.1);
  std::vector<std::vector<ResultRecord>> k1 = {{{Outcome::no_response, 0, 0}}};
  const auto e1 = estimation(k1, p);
  REQUIRE(e1.size() == 1);
  CHECK(e1[0].is_crashed());

  std::vector<std::vector<ResultRecord>> k2 = {ones(60), ones(60)};
  for (const auto& e : estimation(k2, p)) {
    REQUIRE(e.is_value());
    CHECK(e.value() == doctest::Approx(1.0).epsilon(0.02));
  }

  std::vector<std::vector<ResultRecord>> mixed = {{{Outcome::no_response, 1, 0}}, ones(60)};
  const auto em = estimation(mixed, p);
  CHECK(em[0].is_crashed());
  CHECK(em[1].value() == gamma1(p) / 52);
}

TEST_CASE("EstimateValue") {
  CHECK(EstimateValue().is_undetermined());
  CHECK(EstimateValue::crashed().raw() == -1.0);
  CHECK_THROWS_AS(EstimateValue::of(0.0), DomainError);
  CHECK_THROWS(EstimateValue::crashed().value());
  CHECK(EstimateValue::undetermined() == EstimateValue());
}
