#include <doctest.h>

#include <array>
#include <cmath>

#include "aest/rng.hpp"

using namespace aest;

TEST_CASE("same key gives the same stream") {
  auto a = rng_stream(7, 3, 11, StreamDomain::gossip);
  auto b = rng_stream(7, 3, 11, StreamDomain::gossip);
  for (int k = 0; k < 100; ++k) CHECK(a() == b());
}

TEST_CASE("every key component changes the stream") {
  const auto first = [](RngStream s) { return s(); };
  const auto base = first(rng_stream(7, 3, 11, StreamDomain::gossip));
  CHECK(base != first(rng_stream(8, 3, 11, StreamDomain::gossip)));
  CHECK(base != first(rng_stream(7, 4, 11, StreamDomain::gossip)));
  CHECK(base != first(rng_stream(7, 3, 12, StreamDomain::gossip)));
  CHECK(base != first(rng_stream(7, 3, 11, StreamDomain::query)));
}

TEST_CASE("uniform_index is uniform over 16 ids") {
  std::array<int, 16> counts{};
  auto rng = rng_stream(1, 0, 0, StreamDomain::query);
  for (int k = 0; k < 100000; ++k) ++counts[rng.uniform_index(16)];
  for (int c : counts) {
    CHECK(c >= 6250 - 300);
    CHECK(c <= 6250 + 300);
  }
}

TEST_CASE("uniform_index bounds") {
  auto rng = rng_stream(2, 0, 0, StreamDomain::query);
  for (int k = 0; k < 1000; ++k) CHECK(rng.uniform_index(1) == 0);
  for (int k = 0; k < 1000; ++k) CHECK(rng.uniform_index(3) < 3);
}

TEST_CASE("streams of different processors are uncorrelated") {
  auto a = rng_stream(5, 0, 0, StreamDomain::query);
  auto b = rng_stream(5, 1, 0, StreamDomain::query);
  constexpr int kDraws = 100000;
  double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
  for (int k = 0; k < kDraws; ++k) {
    const double x = a.unit(), y = b.unit();
    sa += x;
    sb += y;
    sab += x * y;
    saa += x * x;
    sbb += y * y;
  }
  const double cov = sab / kDraws - (sa / kDraws) * (sb / kDraws);
  const double va = saa / kDraws - (sa / kDraws) * (sa / kDraws);
  const double vb = sbb / kDraws - (sb / kDraws) * (sb / kDraws);
  CHECK(std::abs(cov / std::sqrt(va * vb)) < 0.01);
}

TEST_CASE("unit and bernoulli ranges") {
  auto rng = rng_stream(9, 9, 9, StreamDomain::response);
  for (int k = 0; k < 10000; ++k) {
    const double u = rng.unit();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  for (int k = 0; k < 1000; ++k) CHECK(rng.bernoulli(1.0));
  for (int k = 0; k < 1000; ++k) CHECK_FALSE(rng.bernoulli(0.0));
}
