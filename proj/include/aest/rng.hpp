#pragma once

#include <cstdint>
#include <limits>

#include "aest/types.hpp"

namespace aest {

/// Purpose tag that separates the random streams of one run.
enum class StreamDomain : std::uint32_t {
  query = 0,
  response = 1,
  gossip = 2,
  adversary_probabilities = 16,
  adversary_crashes = 17,
};

/// SplitMix64 generator keyed by (seed, processor, round, domain). Each key
/// gets its own stream, so the draws of one processor never depend on how
/// many draws any other processor made.
///
/// Bounded integers and Bernoulli draws are computed here rather than through
/// <random> distributions so traces replay identically across standard
/// library implementations.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    return mix(state_);
  }

  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform_real(double lo, double hi) { return lo + (hi - lo) * unit(); }

  bool bernoulli(double p) { return unit() < p; }

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t state_;
};

/// The independent stream for one (seed, processor, round, domain) key.
RngStream rng_stream(std::uint64_t seed, ProcessorId id, Round round, StreamDomain domain);

}  // namespace aest
