#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

#include "mnt/common.hpp"

namespace mnt {

// SplitMix64 finalizer, used both as a mixer for seed derivation and to
// decorrelate user-provided seeds before they reach the generator.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Deterministically derives a child seed from a parent seed and a path of
/// integers (e.g. {mu_index, realization}). Folding order is significant:
/// the same path always yields the same child stream on every platform.
inline std::uint64_t derive_seed(std::uint64_t parent,
                                 std::initializer_list<std::uint64_t> path) {
  std::uint64_t h = splitmix64(parent);
  for (std::uint64_t p : path) h = splitmix64(h ^ splitmix64(p));
  return h;
}

/// Deterministic random stream: mt19937_64 with explicit, fully specified
/// mappings to doubles and Gaussians (Box-Muller, one pair per complex
/// draw, no cached state), so a seed pins the stream bit-for-bit given the
/// same libm.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in (0, 1]; safe as a log() argument.
  double uniform_pos() {
    return static_cast<double>((gen_() >> 11) + 1) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = gen_();
    while (x >= limit) x = gen_();
    return x % n;
  }

  /// -1 or +1 with equal probability.
  double sign() { return (gen_() >> 63) ? 1.0 : -1.0; }

  /// Standard normal; consumes one Box-Muller pair, second value discarded.
  double gaussian() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double a = 2.0 * M_PI * uniform();
    return r * std::cos(a);
  }

  /// Circularly symmetric CN(0, variance): real and imaginary parts are
  /// independent N(0, variance/2), produced from a single Box-Muller pair.
  Complex complex_gaussian(double variance) {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    const double a = 2.0 * M_PI * uniform();
    const double s = std::sqrt(variance / 2.0);
    return Complex(s * r * std::cos(a), s * r * std::sin(a));
  }

  /// Uniform binary configuration of the given length, entries in {-1,+1}.
  RealVector binary_config(Eigen::Index n) {
    RealVector c(n);
    for (Eigen::Index i = 0; i < n; ++i) c[i] = sign();
    return c;
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mnt
