#pragma once

#include <cstdint>
#include <random>

namespace sketchpinv {

/// Seeded random stream used by every sampler and generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The mappings to uniform reals, bounded integers and normals are
/// implemented here instead of using std:: distributions (whose algorithms
/// are implementation-defined), so a seed reproduces the same draws with any
/// conforming standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Rejection sampling, no modulo bias.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal (Marsaglia polar method, one cached deviate).
  double normal();

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_ = false;
};

/// SplitMix64 finaliser; derives independent stream seeds from a base seed.
std::uint64_t split_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace sketchpinv
