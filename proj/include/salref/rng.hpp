#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace salref {

// Deterministic RNG used everywhere randomness is needed. All draws go
// through the explicit mappings below so that results are reproducible
// bit-for-bit across reruns and standard library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Independent child stream for a named purpose (batches, refs, init...).
  // Streams derived from the same seed with different tags do not interact.
  Rng(uint64_t seed, std::string_view stream_tag);

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n);

  int range_int(int lo, int hi);  // inclusive ends

  // Standard normal via Box-Muller (cosine branch only; two uniforms per draw).
  double gaussian();

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

  // Fisher-Yates shuffle of 0..n-1.
  std::vector<int> permutation(int n);

  void shuffle(std::vector<int>& items);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 step; used to derive stream seeds and domain mixing seeds.
uint64_t splitmix64(uint64_t x);

// FNV-1a over raw bytes; used for parameter-trajectory digests in tests/logs.
uint64_t fnv1a(const void* data, std::size_t len);

}  // namespace salref
