#include "salref/rng.hpp"

#include <cmath>

namespace salref {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t fnv1a(const void* data, std::size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xcbf29ce484222325ULL;
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

Rng::Rng(uint64_t seed, std::string_view stream_tag)
    : engine_(splitmix64(seed ^ fnv1a(stream_tag.data(), stream_tag.size()))) {}

uint64_t Rng::below(uint64_t n) {
  // Multiply-shift mapping of the raw draw into [0, n).
  return static_cast<uint64_t>((static_cast<__uint128_t>(engine_()) * n) >> 64);
}

int Rng::range_int(int lo, int hi) {
  return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo + 1)));
}

double Rng::gaussian() {
  double u1 = uniform();
  double u2 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> p(n);
  for (int i = 0; i < n; ++i) p[i] = i;
  shuffle(p);
  return p;
}

void Rng::shuffle(std::vector<int>& items) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = below(i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace salref
