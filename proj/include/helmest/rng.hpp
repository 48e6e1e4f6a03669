#pragma once

// Platform-stable random numbers: std::mt19937_64 is specified bit-exactly,
// the standard distributions are not, so the mappings live here.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace helmest {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return rad * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::vector<double> unit_vector(int n) {
    std::vector<double> v(n);
    double s = 0;
    do {
      s = 0;
      for (auto& e : v) {
        e = normal();
        s += e * e;
      }
    } while (s < 1e-20);
    s = std::sqrt(s);
    for (auto& e : v) e /= s;
    return v;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0;
};

// Radical inverse in the given prime base (Halton coordinate).
inline double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

inline unsigned nth_prime(int k) {
  static const unsigned primes[] = {2,  3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47,
                                    53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
                                    113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179,
                                    181, 191, 193, 197, 199, 211, 223, 227, 229, 233, 239, 241,
                                    251, 257, 263, 269, 271, 277, 281, 283, 293, 307, 311, 313};
  return primes[k % (sizeof(primes) / sizeof(primes[0]))];
}

}  // namespace helmest
