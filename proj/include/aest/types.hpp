#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace aest {

using ProcessorId = std::uint32_t;
using Round = std::uint32_t;
using Level = std::uint32_t;

// Raised when a parameter or configuration lies outside its valid domain.
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// ceil(log2(n)) for n >= 1; 0 for n == 1.
constexpr std::uint32_t ceil_log2(std::uint64_t n) {
  std::uint32_t bits = 0;
  std::uint64_t v = 1;
  while (v < n) {
    v <<= 1;
    ++bits;
  }
  return bits;
}

}  // namespace aest
