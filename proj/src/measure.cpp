#include "nhdp/measure.hpp"

#include <algorithm>

namespace nhdp {

DiscreteMeasure::DiscreteMeasure(std::vector<std::int64_t> atoms_in,
                                 Simplex weights_in)
    : atoms(std::move(atoms_in)), weights(std::move(weights_in)) {
  if (atoms.size() != weights.size()) {
    throw ConfigError("measure atoms and weights must have equal length");
  }
  std::vector<std::int64_t> sorted = atoms;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    throw ConfigError("measure atoms must be distinct");
  }
}

DiscreteMeasure dp_over_discrete_base(const DiscreteMeasure& base,
                                      double concentration, Rng& rng) {
  if (!(concentration > 0.0)) {
    throw ConfigError("DP concentration must be positive");
  }
  // Dirichlet parameters must be positive, so zero-mass atoms sit out of the
  // gamma draw and keep weight exactly zero.
  std::vector<std::size_t> positive;
  positive.reserve(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    if (base.weights[i] > 0.0) positive.push_back(i);
  }
  if (positive.empty()) {
    throw ConfigError("base measure has no positive-mass atom");
  }

  std::vector<double> out(base.size(), 0.0);
  if (positive.size() == 1) {
    out[positive.front()] = 1.0;
  } else {
    std::vector<double> alpha(positive.size());
    for (std::size_t j = 0; j < positive.size(); ++j) {
      alpha[j] = concentration * base.weights[positive[j]];
    }
    const Simplex draw = sample_dirichlet(alpha, rng);
    for (std::size_t j = 0; j < positive.size(); ++j) {
      out[positive[j]] = draw[j];
    }
  }
  return DiscreteMeasure(base.atoms, Simplex(std::move(out)));
}

}  // namespace nhdp
