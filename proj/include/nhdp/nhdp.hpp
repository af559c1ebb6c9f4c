#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "nhdp/corpus.hpp"
#include "nhdp/measure.hpp"
#include "nhdp/tree.hpp"

namespace nhdp {

// Beta prior on per-node stopping probabilities.
struct SwitchPrior {
  double a = 1.0;
  double b = 2.0;

  void validate() const {
    if (!(a > 0.0) || !(b > 0.0)) {
      throw ConfigError("switch prior parameters must be positive");
    }
  }
};

// A document's private overlay on the shared tree: one transition measure
// per visited node (a DP draw whose base is the node's CRP predictive,
// frozen when the node is first visited by this document) and one stopping
// probability per visited node (Beta(a, b), forced to 1 at max depth).
//
// Everything materializes lazily along the paths words actually walk. A walk
// that lands on the new-child slot resolves it against the shared tree:
// fresh children are instantiated globally (seat count 1) and their document
// weights are carved out of the slot's mass by stick-breaking, which is the
// DP's own law for the unresolved remainder.
class DocumentTree {
 public:
  DocumentTree(GlobalTree& tree, double doc_concentration, SwitchPrior prior,
               std::uint64_t doc_id = 0);

  GlobalTree& tree() { return *tree_; }
  std::uint64_t doc_id() const { return doc_id_; }
  double doc_concentration() const { return doc_concentration_; }

  // Per-depth switch priors; index = node depth. Missing depths fall back to
  // the constructor prior.
  void set_depth_switch_priors(std::vector<SwitchPrior> priors);

  // Pins every materialized-later switch to p (depth L stays forced at 1).
  void force_constant_switch(double p);

  double switch_probability(const NodePath& node, Rng& rng);
  void set_switch(const NodePath& node, double p);

  // The document's current transition measure at `node`: resolved child
  // atoms plus, while unresolved mass remains, the reserved new-child atom.
  DiscreteMeasure transition(const NodePath& node, Rng& rng);

  // Draws one child for a word walking through `node`. May instantiate
  // children in the shared tree.
  NodePath sample_child(const NodePath& node, Rng& rng);

  // Nodes this document has materialized, in path order.
  std::vector<NodePath> materialized() const;

 private:
  struct NodeState {
    std::vector<std::int64_t> atoms;   // resolved child indices
    std::vector<double> weights;       // document weights, aligned to atoms
    double new_mass = 0.0;             // unresolved new-child mass
    double base_new_mass = 0.0;        // frozen base mass of the slot
    bool slot_open = false;            // base had a slot, not yet exhausted
    double switch_probability = 1.0;
  };

  NodeState& materialize(const NodePath& node, Rng& rng);
  std::uint32_t resolve_new_child(const NodePath& node, NodeState& state,
                                  Rng& rng);

  GlobalTree* tree_;
  double doc_concentration_;
  SwitchPrior prior_;
  std::uint64_t doc_id_;
  std::vector<SwitchPrior> depth_priors_;
  std::optional<double> forced_switch_;
  std::map<NodePath, NodeState> states_;
};

// Root-down walk: stop at a node with its switching probability, otherwise
// descend through the document's transition measure. Terminates by max
// depth, where stopping is forced.
NodePath sample_word_path(DocumentTree& doc_tree, Rng& rng);

struct NhdpDocument {
  std::uint64_t doc_id = 0;
  std::vector<std::uint32_t> words;
  std::vector<NodePath> assignments;
};

NhdpDocument generate_nhdp_document(GlobalTree& tree, DocumentTree& doc_tree,
                                    std::size_t n_words, Rng& rng);

struct NhdpPriors {
  double doc_concentration = 1.0;
  SwitchPrior switch_prior{};
};

GeneratedCorpus generate_nhdp_corpus(GlobalTree& tree, std::size_t n_docs,
                                     std::size_t words_per_doc,
                                     const NhdpPriors& priors, Rng& rng);

GeneratedCorpus generate_nhdp_corpus(GlobalTree& tree,
                                     const std::vector<std::size_t>& doc_sizes,
                                     const NhdpPriors& priors, Rng& rng);

}  // namespace nhdp
