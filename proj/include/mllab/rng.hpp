#pragma once

#include <cstdint>
#include <random>

namespace mllab {

/// SplitMix64 output finalizer. A bijection on 64-bit words.
constexpr std::uint64_t splitmix64_mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed of path `path_index` under `master_seed`:
///   splitmix64_mix(master_seed ^ ((path_index + 1) * 0x9e3779b97f4a7c15)).
/// Injective in path_index for a fixed master seed.
constexpr std::uint64_t derive_path_seed(std::uint64_t master_seed,
                                         std::uint64_t path_index) noexcept {
  return splitmix64_mix(master_seed ^ ((path_index + 1) * 0x9e3779b97f4a7c15ULL));
}

/// Random stream with a bit-exact, platform-independent output sequence.
/// std::mt19937_64 is fully specified by the standard; the real-valued
/// draws below are built from raw bits rather than std:: distributions,
/// whose algorithms are implementation-defined.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1).
  double uniform_open() {
    return (static_cast<double>(engine_() >> 12) + 0.5) * 0x1.0p-52;
  }

  /// Standard exponential.
  double exponential();

 private:
  std::mt19937_64 engine_;
};

}  // namespace mllab
