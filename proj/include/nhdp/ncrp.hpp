#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "nhdp/corpus.hpp"
#include "nhdp/tree.hpp"

namespace nhdp {

// Distribution over levels 0..L of a depth-L path (level 0 = root).
using LevelWeights = Simplex;

// Stick-breaking arithmetic over given beta draws: weight_i = v_i *
// prod_{j<i}(1 - v_j), with the final level absorbing the residual mass.
LevelWeights weights_from_sticks(std::span<const double> sticks);

// Draws the sticks from Beta(1, gamma).
LevelWeights stick_breaking_weights(double gamma, std::size_t levels,
                                    Rng& rng);

// The single-path baseline document: one path per document, every word drawn
// from some prefix of that path.
struct NcrpDocument {
  NodePath path;
  LevelWeights level_weights;
  std::vector<std::uint32_t> words;
  std::vector<std::uint32_t> levels;

  NodePath assignment(std::size_t word) const {
    return path.prefix(levels.at(word));
  }
};

NcrpDocument generate_ncrp_document(GlobalTree& tree, double gamma,
                                    std::size_t n_words, Rng& rng);

// Variant with injected level weights (the path is still sampled).
NcrpDocument generate_ncrp_document(GlobalTree& tree,
                                    LevelWeights level_weights,
                                    std::size_t n_words, Rng& rng);

GeneratedCorpus generate_ncrp_corpus(GlobalTree& tree, double gamma,
                                     std::size_t n_docs,
                                     std::size_t words_per_doc, Rng& rng);

}  // namespace nhdp
