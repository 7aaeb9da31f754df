#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>

namespace pwa_reach {

/// Small deterministic PRNG (xoshiro256**). Hand-rolled so that seeded runs
/// are bit-for-bit reproducible regardless of the standard library in use.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    // splitmix64 expansion of the seed into the state
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      s = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 1e-300) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 6.283185307179586476925 * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  /// Uniform direction on the unit sphere in R^n.
  Eigen::VectorXd on_sphere(int n) {
    Eigen::VectorXd v(n);
    double norm2 = 0.0;
    do {
      for (int i = 0; i < n; ++i) v[i] = normal();
      norm2 = v.squaredNorm();
    } while (norm2 < 1e-30);
    return v / std::sqrt(norm2);
  }

  /// Uniform point in the closed unit ball in R^n.
  Eigen::VectorXd in_ball(int n) {
    const double radius = std::pow(uniform(), 1.0 / static_cast<double>(n));
    return radius * on_sphere(n);
  }

  /// Uniform point on the probability simplex (entries >= 0, sum = 1).
  Eigen::VectorXd on_simplex(int n) {
    Eigen::VectorXd v(n);
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      double u = uniform();
      while (u <= 1e-300) u = uniform();
      v[i] = -std::log(u);
      sum += v[i];
    }
    return v / sum;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4] = {};
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pwa_reach
