#pragma once

// Deterministic random numbers.  std::normal_distribution is not pinned by
// the standard, so Gaussian draws go through an explicit Box-Muller
// transform; results are then identical across compilers for a given seed.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace structbreak {

// splitmix64 step; used to derive independent per-replication seeds from a
// base seed without correlations between nearby streams.
inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class NormalSampler {
 public:
  explicit NormalSampler(std::uint64_t seed) : gen_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // Box-Muller: u1 in (0,1], u2 in [0,1).
    double u1, u2;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  double uniform01() {
    // 53-bit mantissa uniform in [0,1).
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace structbreak
