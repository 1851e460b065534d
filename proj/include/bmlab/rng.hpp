#pragma once

#include <cstdint>

#include "core.hpp"

namespace bmlab {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Counter-based stream: the k-th draw depends only on (seed, index, k).
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index)
      : key_(splitmix64(splitmix64(seed) ^ (index * 0xD1B54A32D192ED03ull))) {}

  std::uint64_t next_u64() { return splitmix64(key_ + 0x9E3779B97F4A7C15ull * ++ctr_); }
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  int integer(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }
  double normal() {
    double u1 = uniform(), u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * pi * u2);
  }
  Vec sphere(int n) {
    if (n == 1) return make_vec({uniform() < 0.5 ? -1.0 : 1.0});
    Vec v(n);
    double nn = 0.0;
    do {
      for (int i = 0; i < n; ++i) v(i) = normal();
      nn = v.norm();
    } while (nn < 1e-12);
    return v / nn;
  }
  std::uint64_t counter() const { return ctr_; }

 private:
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
};

inline double halton(std::uint64_t index, int base) {
  double f = 1.0, r = 0.0;
  while (index > 0) {
    f /= base;
    r += f * static_cast<double>(index % base);
    index /= base;
  }
  return r;
}

inline constexpr int halton_primes[6] = {2, 3, 5, 7, 11, 13};

}  // namespace bmlab
