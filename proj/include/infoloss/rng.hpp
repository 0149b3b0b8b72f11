#pragma once

#include <complex>
#include <cstdint>
#include <random>

namespace infoloss {

/// 64-bit seeded generator. The engine is mt19937_64; the seed is first
/// whitened with splitmix64. Uniform and normal variates are derived from the
/// raw 64-bit output by fixed formulas (53-bit mantissa, Box-Muller) rather
/// than the standard distributions, whose algorithms are implementation
/// defined, so sequences are identical across standard libraries.
///
/// Single owner: not thread safe. Parallel work should take one substream
/// per task via SeededRng::substream.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed);

  /// Independent stream for task `index` under `master_seed`. Depends only on
  /// the pair, never on scheduling.
  static SeededRng substream(std::uint64_t master_seed, std::uint64_t index);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  /// Standard complex Gaussian: E|z|^2 = 1.
  std::complex<double> complex_normal();
  /// Exponential(1) variate.
  double exponential();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace infoloss
