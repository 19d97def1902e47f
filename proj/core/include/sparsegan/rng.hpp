#pragma once

#include <cstdint>
#include <random>

namespace sparsegan {

/// SplitMix64 step. Used to derive independent stream seeds from one root seed.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d82db6a9e30d3dULL;
  return x ^ (x >> 31);
}

/// Named randomness streams. Each stream is an independently seeded engine so
/// that, e.g., topology updates never perturb the data draw sequence.
enum class Stream : std::uint64_t {
  Data = 1,  // real batches and latent draws
  Init = 2,  // weight values and initial masks
  Dst = 3,   // random growth and any topology tie randomness
  Eval = 4,  // metric batches and the fixed reference sample
};

/// Deterministic PRNG: std::mt19937_64 core (bit-exact across conforming
/// standard libraries) with distributions implemented here rather than via
/// std::*_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_stream(std::uint64_t root_seed, Stream stream) {
    return Rng(splitmix64(root_seed ^ (0x5bf0263ULL + static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ULL)));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform index in [0, n). Rejection sampling, exactly uniform.
  std::size_t uniform_index(std::size_t n);

  /// Standard normal via Box-Muller; second value of each pair is cached.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

 private:
  std::mt19937_64 engine_;
  bool has_cached_ = false;
  double cached_ = 0.0;
};

}  // namespace sparsegan
