#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace contourlab {

/// Deterministic 64-bit generator. The engine bit stream is fixed by the
/// standard; the conversions to floats and ranges are done here so the
/// sample stream does not depend on the standard library implementation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi], both inclusive. Unbiased (rejection).
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
};

/// Seed of one stimulus. Depends only on its arguments, so stimuli can be
/// generated in any order or in parallel.
std::uint64_t derive_seed(std::uint64_t master_seed, std::string_view stream,
                          std::uint64_t index);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace contourlab
