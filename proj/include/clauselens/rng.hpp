#pragma once

#include <cmath>
#include <cstdint>

#include "clauselens/errors.hpp"

namespace clauselens {

/// splitmix64, used for seeding and stream derivation.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** with explicit state. All sampling in the project goes through
/// this engine so that results are identical across platforms and standard
/// library versions; std:: distributions are implementation-defined and are
/// deliberately not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  /// Derive an independent stream from (seed, stream, index). Episodes use
  /// one stream each so serial and concurrent rollouts see the same draws.
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id,
                    std::uint64_t index) {
    std::uint64_t sm = seed;
    std::uint64_t a = splitmix64(sm);
    sm = a ^ (stream_id * 0x9e3779b97f4a7c15ULL + 0x2545f4914f6cdd1dULL);
    std::uint64_t b = splitmix64(sm);
    sm = b ^ (index + 0x452821e638d01377ULL);
    return Rng(splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1).
  double uniform01() { return double(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Index into a cumulative weight table (weights need not be normalized).
  std::size_t categorical(const double* weights, std::size_t n) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += weights[i];
    double u = uniform01() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      acc += weights[i];
      if (u < acc) return i;
    }
    return n - 1;
  }

  /// Standard normal via Box-Muller. The second value is discarded so the
  /// draw count per call is fixed (two uniforms), keeping streams replayable.
  double normal() {
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  /// Poisson count. Inversion by sequential search for small rates (exact);
  /// rounded normal approximation above, where the desk-scale configs never
  /// go in practice.
  std::uint32_t poisson(double rate) {
    if (rate < 0.0) throw DomainError("poisson rate must be nonnegative");
    if (rate == 0.0) return 0;
    if (rate < 30.0) {
      double p = std::exp(-rate);
      double cdf = p;
      double u = uniform01();
      std::uint32_t k = 0;
      while (u > cdf) {
        ++k;
        p *= rate / double(k);
        cdf += p;
        if (k > 10000) break;  // guards against pathological rounding
      }
      return k;
    }
    double draw = rate + std::sqrt(rate) * normal();
    return draw <= 0.0 ? 0u : std::uint32_t(draw + 0.5);
  }

  double lognormal(double mu, double sigma) {
    return std::exp(mu + sigma * normal());
  }

  /// Pareto with scale xm and shape alpha (support [xm, inf)).
  double pareto(double alpha, double xm) {
    double u = 1.0 - uniform01();  // u in (0, 1]
    return xm * std::pow(u, -1.0 / alpha);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t s_[4];
};

}  // namespace clauselens
