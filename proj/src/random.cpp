#include "nhdp/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace nhdp {

Simplex::Simplex(std::vector<double> weights) : weights_(std::move(weights)) {
  if (!is_valid(weights_)) {
    throw ConfigError("invalid simplex: entries must be >= 0 and sum to 1");
  }
}

bool Simplex::is_valid(std::span<const double> weights) {
  if (weights.empty()) return false;
  double sum = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) return false;  // rejects negatives and NaN
    sum += w;
  }
  return std::abs(sum - 1.0) <= kSumTolerance;
}

double Rng::next_normal() {
  // Box-Muller, cosine branch only. Wastes the twin but keeps the stream
  // layout a fixed two-uniforms-per-normal.
  const double u1 = next_unit_pos();
  const double u2 = next_unit();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::next_gamma(double shape) {
  if (!(shape > 0.0)) {
    throw ConfigError("gamma shape must be positive");
  }
  if (shape < 1.0) {
    // Boost: draw at shape+1 and scale by U^(1/shape).
    const double u = next_unit_pos();
    return next_gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
  }
  // Marsaglia-Tsang squeeze.
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = next_normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = next_unit_pos();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

Simplex sample_dirichlet(std::span<const double> alpha, Rng& rng) {
  if (alpha.size() < 2) {
    throw ConfigError("dirichlet needs at least 2 concentration entries");
  }
  for (double a : alpha) {
    if (!(a > 0.0)) {
      throw ConfigError("dirichlet concentration entries must be positive");
    }
  }
  std::vector<double> draws(alpha.size());
  for (;;) {
    double total = 0.0;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      draws[i] = rng.next_gamma(alpha[i]);
      total += draws[i];
    }
    if (total > 0.0) {
      for (double& d : draws) d /= total;
      return Simplex(std::move(draws));
    }
    // All gammas underflowed to zero; redraw. Only reachable for extreme
    // concentrations far below anything this library accepts as a default.
    draws.assign(alpha.size(), 0.0);
  }
}

double sample_beta(double a, double b, Rng& rng) {
  if (!(a > 0.0) || !(b > 0.0)) {
    throw ConfigError("beta parameters must be positive");
  }
  const double ga = rng.next_gamma(a);
  const double gb = rng.next_gamma(b);
  const double sum = ga + gb;
  if (sum <= 0.0) {
    // Both gammas underflowed (tiny shapes): the draw degenerates to a
    // Bernoulli on {0, 1} with mean a/(a+b).
    return rng.next_unit() < a / (a + b) ? 1.0 : 0.0;
  }
  return ga / sum;
}

std::size_t sample_discrete(const Simplex& p, Rng& rng) {
  const double u = rng.next_unit();
  double cum = 0.0;
  std::size_t last_positive = 0;
  bool seen_positive = false;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] > 0.0) {
      last_positive = i;
      seen_positive = true;
    }
    cum += p[i];
    if (u < cum) return i;
  }
  // Rounding left u just above the accumulated sum; land on the last
  // positive-mass entry.
  if (!seen_positive) throw InternalError("discrete draw from zero simplex");
  return last_positive;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) {
    throw ConfigError("log_sum_exp of empty vector");
  }
  const double m = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(m)) return m;  // all -inf (or a stray inf/NaN) dominates
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - m);
  return m + std::log(sum);
}

}  // namespace nhdp
