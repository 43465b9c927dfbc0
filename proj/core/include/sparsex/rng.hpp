#pragma once

#include <cstdint>
#include <random>

namespace sparsex {

/// Portable random source: std::mt19937_64 (whose output sequence is fixed by
/// the standard) plus hand-written distributions, since the standard library
/// distributions are implementation-defined. Equal seeds give bitwise equal
/// streams across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, bound). Rejection sampling, unbiased.
  std::uint64_t uniform_index(std::uint64_t bound);

  /// Standard normal via the Marsaglia polar method.
  double normal();

  /// Stream splitting: a well-mixed seed for sub-stream `stream` of `master`.
  static std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sparsex
