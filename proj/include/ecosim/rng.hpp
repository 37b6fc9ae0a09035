#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace ecosim {

// Deterministic RNG with fixed, implementation-independent output so that
// replications are bit-identical across compilers and standard libraries
// (std distributions are implementation-specified). splitmix64 core.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform in [0, 1)
  double uniform() { return (next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n) { return n ? next_u64() % n : 0; }

  // index into cumulative weights (strictly increasing, last = total)
  size_t pick_cumulative(const std::vector<double>& cum) {
    double x = uniform() * cum.back();
    size_t lo = 0, hi = cum.size() - 1;
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (cum[mid] <= x) lo = mid + 1; else hi = mid;
    }
    return lo;
  }

  // Fisher-Yates over indices 0..n-1
  std::vector<uint32_t> permutation(size_t n) {
    std::vector<uint32_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = static_cast<uint32_t>(i);
    for (size_t i = n; i > 1; --i) {
      size_t j = below(i);
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }

  // standard normal via Box-Muller (deterministic pair use)
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

 private:
  uint64_t state_;
};

}  // namespace ecosim
