#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace stm {

inline uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline uint64_t fnv1a64(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic RNG. std::mt19937_64 output is pinned by the standard and all
// derived draws below avoid std::*_distribution, whose mapping is
// implementation-defined; results are therefore reproducible across builds.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix64(seed)) {}

  uint64_t next_u64() { return gen_(); }

  // uniform on [0, 1)
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // uniform on {0, ..., n-1}
  int uniform_int(int n) {
    assert(n > 0);
    const uint64_t un = static_cast<uint64_t>(n);
    const uint64_t limit = UINT64_MAX - UINT64_MAX % un;
    uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return static_cast<int>(x % un);
  }

  bool bernoulli(double p) { return uniform01() < p; }

  // Draw an index proportional to weights (need not be normalized).
  int categorical(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    assert(total > 0.0);
    double u = uniform01() * total;
    for (size_t i = 0; i < weights.size(); ++i) {
      u -= weights[i];
      if (u < 0.0) return static_cast<int>(i);
    }
    // numerical leftovers land on the last positive weight
    for (size_t i = weights.size(); i-- > 0;) {
      if (weights[i] > 0.0) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

  // Draw an index from unnormalized log weights (max-subtraction).
  int categorical_log(std::span<const double> log_weights,
                      std::vector<double>& scratch) {
    double mx = -HUGE_VAL;
    for (double lw : log_weights) mx = std::max(mx, lw);
    scratch.resize(log_weights.size());
    for (size_t i = 0; i < log_weights.size(); ++i) {
      scratch[i] = std::exp(log_weights[i] - mx);
    }
    return categorical(scratch);
  }

  // Independent substream for (seed, tag), e.g. per-document chains.
  static Rng derive(uint64_t seed, std::string_view tag) {
    return Rng(splitmix64(seed ^ fnv1a64(tag)));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace stm
