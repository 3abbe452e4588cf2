#include "aest/rng.hpp"

namespace aest {

std::uint64_t RngStream::uniform_index(std::uint64_t bound) {
  // Lemire's multiply-shift with rejection of the biased low region.
  __extension__ using u128 = unsigned __int128;
  std::uint64_t x = (*this)();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = (*this)();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

RngStream rng_stream(std::uint64_t seed, ProcessorId id, Round round, StreamDomain domain) {
  std::uint64_t h = RngStream::mix(seed ^ 0x6a09e667f3bcc909ULL);
  h = RngStream::mix(h ^ ((static_cast<std::uint64_t>(id) + 1) * 0x9e3779b97f4a7c15ULL));
  h = RngStream::mix(h ^ ((static_cast<std::uint64_t>(round) + 1) * 0xc2b2ae3d27d4eb4fULL));
  h = RngStream::mix(h ^ ((static_cast<std::uint64_t>(domain) + 1) * 0x165667b19e3779f9ULL));
  return RngStream(h);
}

}  // namespace aest
