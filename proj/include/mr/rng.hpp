#pragma once
// Deterministic RNG. std::mt19937_64 is bit-exact across platforms, but the
// std <random> *distributions* are implementation-defined, so every draw here
// uses our own fixed algorithms on top of the raw engine.

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mr/common.hpp"

namespace mr {

class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  // Unbiased integer in [0, n) by rejection sampling on the top bits.
  uint64_t uniform_u64(uint64_t n) {
    if (n == 0) throw DataError("uniform_u64: n must be positive");
    uint64_t mask = ~uint64_t{0};
    if (n & (n - 1)) {
      uint64_t lim = ~uint64_t{0} - (~uint64_t{0} % n + 1) % n;
      uint64_t v = eng_();
      while (v > lim) v = eng_();
      return v % n;
    }
    // power of two: mask the low bits
    mask = n - 1;
    return eng_() & mask;
  }

  int64_t uniform_int(int64_t lo, int64_t hi) {  // inclusive range
    if (hi < lo) throw DataError("uniform_int: empty range");
    return lo + static_cast<int64_t>(uniform_u64(static_cast<uint64_t>(hi - lo) + 1));
  }

  // [0, 1) with 53 random mantissa bits.
  double uniform_real() { return (eng_() >> 11) * 0x1.0p-53; }

  // Box-Muller, cosine branch only: two raw draws per sample, no cached state,
  // so the consumed stream length is a pure function of the call count.
  double gaussian() {
    double u1 = uniform_real();
    while (u1 <= 0.0) u1 = uniform_real();
    double u2 = uniform_real();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Fisher-Yates with our own index draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(uniform_u64(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // mt19937_64 stream state is standardized, so text round-trips exactly.
  std::string serialize() const {
    std::ostringstream ss;
    ss << eng_;
    return ss.str();
  }
  void deserialize(const std::string& s) {
    std::istringstream ss(s);
    ss >> eng_;
    if (!ss) throw DataError("rng state parse failure");
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mr
