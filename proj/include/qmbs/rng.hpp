#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace qmbs {

/// Recorded in every metadata sidecar. Bump the suffix if the draw order or
/// stream derivation below ever changes.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64/splitmix64-substreams/v1";

enum class Stream : std::uint64_t {
  hopping = 1,  // T or K bond entries
  onsite = 2,   // A_x
  parent = 3,   // B_x
  state = 4,    // random test / reference vectors
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t substream_seed(std::uint64_t seed, Stream stream) {
  return splitmix64(splitmix64(seed) ^ (static_cast<std::uint64_t>(stream) * 0xD1B54A32D192ED03ULL));
}

/// Platform-independent uniform and normal draws on top of std::mt19937_64, whose
/// output sequence is fixed by the standard. The std distributions are not used
/// because their algorithms are implementation-defined.
class Rng {
 public:
  Rng(std::uint64_t seed, Stream stream) : engine_(substream_seed(seed, stream)) {}

  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    has_spare_ = true;
    return radius * std::cos(angle);
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace qmbs
