#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "nhdp/errors.hpp"

namespace nhdp {

// Weights on a finite set: every entry >= 0, summing to one within 1e-9.
class Simplex {
 public:
  static constexpr double kSumTolerance = 1e-9;

  explicit Simplex(std::vector<double> weights);

  std::size_t size() const { return weights_.size(); }
  double operator[](std::size_t i) const { return weights_[i]; }
  const std::vector<double>& weights() const { return weights_; }

  auto begin() const { return weights_.begin(); }
  auto end() const { return weights_.end(); }

  static bool is_valid(std::span<const double> weights);

 private:
  std::vector<double> weights_;
};

// Deterministic random source. A single mt19937_64 stream; every
// distribution is derived from it through fixed arithmetic (53-bit uniforms,
// Box-Muller normals, Marsaglia-Tsang gammas), so a seed pins the entire
// draw sequence on any platform. Single-owner: never share an Rng across
// threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed), seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double next_unit() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1); safe under log().
  double next_unit_pos() {
    return (static_cast<double>(gen_() >> 12) + 0.5) * 0x1.0p-52;
  }

  double next_normal();
  double next_gamma(double shape);  // unit scale, shape > 0

 private:
  std::mt19937_64 gen_;
  std::uint64_t seed_;
};

Simplex sample_dirichlet(std::span<const double> alpha, Rng& rng);
double sample_beta(double a, double b, Rng& rng);
std::size_t sample_discrete(const Simplex& p, Rng& rng);

// Overflow-free log(sum(exp(values))).
double log_sum_exp(std::span<const double> values);

}  // namespace nhdp
