#pragma once

#include <cstdint>
#include <random>

namespace fairalloc::detail {

// Uniform [0, 1) from the top 53 bits, so streams are identical across
// standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  std::size_t index(std::size_t n) {
    const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
    return i < n ? i : n - 1;
  }

private:
  std::mt19937_64 engine_;
};

}  // namespace fairalloc::detail
