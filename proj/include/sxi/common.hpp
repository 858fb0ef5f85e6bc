#ifndef SXI_COMMON_HPP
#define SXI_COMMON_HPP

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sxi {

// Bad input data or files; the CLI maps this to exit code 2.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A pipeline stage failed internally; CLI exit code 3.
class InternalError : public std::runtime_error {
 public:
  explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

using Rng = std::mt19937_64;

// Stable per-stage seed derivation so stages stay reproducible when run in
// isolation or in parallel.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xff;
      h *= 1099511628211ull;
    }
  };
  mix(master);
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  mix(index);
  return h;
}

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace sxi

#endif  // SXI_COMMON_HPP
