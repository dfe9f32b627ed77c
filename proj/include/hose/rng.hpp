#pragma once

#include <cstdint>
#include <random>

namespace hose {

/// Deterministic Gaussian source: mt19937_64 with an explicit Box-Muller
/// transform, so streams are reproducible across platforms and standard
/// libraries (std::normal_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; pairs are cached.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  std::uint64_t next_raw() { return gen_(); }

  /// Independent child stream for one replicate of a seeded study.
  static Rng for_replicate(std::uint64_t base_seed, std::uint64_t replicate) {
    return Rng(splitmix64(splitmix64(base_seed) ^ splitmix64(replicate + 1)));
  }

  /// splitmix64 finalizer; used to decorrelate derived seeds.
  static std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace hose
