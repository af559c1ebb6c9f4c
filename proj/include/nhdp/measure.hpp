#pragma once

#include <cstdint>
#include <vector>

#include "nhdp/random.hpp"

namespace nhdp {

// Atom id reserved for the not-yet-instantiated-child slot of a CRP
// predictive. Regular atoms are child indices >= 0.
inline constexpr std::int64_t kNewChildAtom = -1;

// A finite discrete probability measure: distinct opaque atom ids with
// aligned weights.
struct DiscreteMeasure {
  std::vector<std::int64_t> atoms;
  Simplex weights;

  DiscreteMeasure(std::vector<std::int64_t> atoms_in, Simplex weights_in);

  std::size_t size() const { return atoms.size(); }
};

// One draw from a Dirichlet process whose base is itself discrete: the
// output re-weights exactly the base's atoms (a Dirichlet draw with
// parameters concentration * base weight). Atoms carrying zero base mass
// stay at exactly zero.
DiscreteMeasure dp_over_discrete_base(const DiscreteMeasure& base,
                                      double concentration, Rng& rng);

}  // namespace nhdp
