#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

// Deterministic random numbers. The raw bit stream is std::mt19937_64, whose
// output sequence is pinned by the C++ standard; every distribution on top is
// hand-rolled here so draws are bit-identical across standard libraries.

namespace rdwd::rng {

// SplitMix64 mixer, used to derive independent streams from a user seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Engine {
 public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // Uniform on [0,1) from the top 53 bits.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform on (0,1); rejects the (2^-53-probability) exact zero.
  double uniform_pos() {
    double u;
    do {
      u = uniform();
    } while (u == 0.0);
    return u;
  }

  // Standard normal, Marsaglia polar method with the spare value cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  // Gamma(alpha, 1), Marsaglia–Tsang squeeze. Valid for all alpha > 0: shapes
  // below one use the boost Gamma(alpha) = Gamma(alpha+1) * U^(1/alpha).
  double gamma(double alpha) {
    if (alpha < 1.0) {
      const double u = uniform_pos();
      return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
    }
    const double d = alpha - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x, v;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform_pos();
      if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
      if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
  }

  // Symmetric Dirichlet(alpha,...,alpha) on the d-simplex: normalized Gamma
  // draws, renormalized so the coordinates sum to one exactly as stored.
  std::vector<double> dirichlet(double alpha, std::size_t d) {
    std::vector<double> g(d);
    double sum = 0.0;
    for (auto& gi : g) {
      gi = gamma(alpha);
      sum += gi;
    }
    for (auto& gi : g) gi /= sum;
    return g;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stream for replication `rep` of a seeded experiment (derived seed is
// seed + rep). `tag` splits off independent consumers inside one replication.
inline Engine substream(std::uint64_t seed, std::uint64_t rep, std::uint64_t tag = 0) {
  const std::uint64_t derived = seed + rep;
  return Engine(tag == 0 ? derived : splitmix64(derived ^ splitmix64(tag)));
}

}  // namespace rdwd::rng
