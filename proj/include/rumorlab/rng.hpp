#pragma once

#include <cstdint>
#include <random>

namespace rumorlab {

/// The single random stream used everywhere. All variates are derived from
/// raw 64-bit draws by our own transforms so output is reproducible across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1].
  double uniform_open0() { return 1.0 - uniform(); }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  double exponential(double rate);

  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Seed for replica `index` of a sweep rooted at `base_seed`.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

}  // namespace rumorlab
