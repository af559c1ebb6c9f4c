#include "nhdp/nhdp.hpp"

#include <algorithm>

namespace nhdp {

DocumentTree::DocumentTree(GlobalTree& tree, double doc_concentration,
                           SwitchPrior prior, std::uint64_t doc_id)
    : tree_(&tree),
      doc_concentration_(doc_concentration),
      prior_(prior),
      doc_id_(doc_id) {
  if (!(doc_concentration_ > 0.0)) {
    throw ConfigError("document concentration must be positive");
  }
  prior_.validate();
}

void DocumentTree::set_depth_switch_priors(std::vector<SwitchPrior> priors) {
  for (const auto& p : priors) p.validate();
  depth_priors_ = std::move(priors);
}

void DocumentTree::force_constant_switch(double p) {
  if (!(p >= 0.0) || p > 1.0) {
    throw ConfigError("switch probability must lie in [0, 1]");
  }
  forced_switch_ = p;
}

DocumentTree::NodeState& DocumentTree::materialize(const NodePath& node,
                                                   Rng& rng) {
  auto it = states_.find(node);
  if (it != states_.end()) return it->second;

  NodeState state;
  if (node.depth() >= tree_->max_depth()) {
    state.switch_probability = 1.0;  // truncation forces termination
  } else if (forced_switch_) {
    state.switch_probability = *forced_switch_;
  } else {
    const SwitchPrior& prior = node.depth() < depth_priors_.size()
                                   ? depth_priors_[node.depth()]
                                   : prior_;
    state.switch_probability = sample_beta(prior.a, prior.b, rng);
  }

  if (node.depth() < tree_->max_depth()) {
    // Freeze the CRP predictive as it stands right now, then draw this
    // document's weights over it.
    const Simplex base = tree_->crp_child_probabilities(node);
    const std::size_t k = base.size() - 1;  // trailing entry = new-child slot
    std::vector<std::int64_t> atoms;
    std::vector<double> base_w;
    for (std::size_t i = 0; i < k; ++i) {
      atoms.push_back(static_cast<std::int64_t>(i));
      base_w.push_back(base[i]);
    }
    state.base_new_mass = base[k];
    if (state.base_new_mass > 0.0) {
      state.slot_open = true;
      atoms.push_back(kNewChildAtom);
      base_w.push_back(state.base_new_mass);
    }
    const DiscreteMeasure draw = dp_over_discrete_base(
        DiscreteMeasure(atoms, Simplex(base_w)), doc_concentration_, rng);
    for (std::size_t i = 0; i < draw.size(); ++i) {
      if (draw.atoms[i] == kNewChildAtom) {
        state.new_mass = draw.weights[i];
      } else {
        state.atoms.push_back(draw.atoms[i]);
        state.weights.push_back(draw.weights[i]);
      }
    }
  }

  auto [pos, inserted] = states_.emplace(node, std::move(state));
  return pos->second;
}

double DocumentTree::switch_probability(const NodePath& node, Rng& rng) {
  return materialize(node, rng).switch_probability;
}

void DocumentTree::set_switch(const NodePath& node, double p) {
  if (!(p >= 0.0) || p > 1.0) {
    throw ConfigError("switch probability must lie in [0, 1]");
  }
  if (node.depth() >= tree_->max_depth() && p != 1.0) {
    throw ConfigError("switch at max depth is forced to 1");
  }
  auto it = states_.find(node);
  if (it == states_.end()) {
    throw ConfigError("node " + to_string(node) + " not materialized");
  }
  it->second.switch_probability = p;
}

DiscreteMeasure DocumentTree::transition(const NodePath& node, Rng& rng) {
  if (node.depth() >= tree_->max_depth()) {
    throw ConfigError("node " + to_string(node) +
                      " is at leaf level; it has no transitions");
  }
  const NodeState& state = materialize(node, rng);
  std::vector<std::int64_t> atoms = state.atoms;
  std::vector<double> weights = state.weights;
  if (state.slot_open) {
    atoms.push_back(kNewChildAtom);
    weights.push_back(state.new_mass);
  }
  // Guard against drift from repeated stick splits.
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (sum > 0.0) {
    for (double& w : weights) w /= sum;
  }
  return DiscreteMeasure(std::move(atoms), Simplex(std::move(weights)));
}

std::uint32_t DocumentTree::resolve_new_child(const NodePath& node,
                                              NodeState& state, Rng& rng) {
  // The unresolved remainder of a DP draw is itself a DP with concentration
  // scaled by the slot's base mass. Peel atoms off it by stick-breaking
  // until this word's draw lands on one; every peeled atom is a fresh child
  // of the shared tree.
  const double stick_conc = doc_concentration_ * state.base_new_mass;
  const std::size_t cap = tree_->child_caps()[node.depth()];
  for (;;) {
    if (tree_->node(node).child_counts.size() >= cap) break;
    const NodePath child = tree_->instantiate_child(node, rng);
    const std::uint32_t index = child.indices.back();
    const double v = sample_beta(1.0, stick_conc, rng);
    state.atoms.push_back(static_cast<std::int64_t>(index));
    state.weights.push_back(state.new_mass * v);
    state.new_mass *= 1.0 - v;
    if (rng.next_unit() < v) return index;
  }
  // Cap exhausted: nothing left to instantiate, so the residual mass folds
  // into the resolved atoms.
  state.slot_open = false;
  if (!state.atoms.empty()) {
    const std::size_t last = state.weights.size() - 1;
    state.weights[last] += state.new_mass;
    state.new_mass = 0.0;
    return static_cast<std::uint32_t>(state.atoms[last]);
  }
  // Frozen base promised a new child but the cap filled in the meantime and
  // this document resolved nothing yet: fall back to the shared predictive.
  state.new_mass = 0.0;
  const NodePath child = tree_->sample_child(node, rng);
  const std::uint32_t index = child.indices.back();
  state.atoms.push_back(static_cast<std::int64_t>(index));
  state.weights.push_back(1.0);
  return index;
}

NodePath DocumentTree::sample_child(const NodePath& node, Rng& rng) {
  NodeState& state = materialize(node, rng);
  std::vector<double> weights = state.weights;
  weights.push_back(state.new_mass);
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (!(sum > 0.0)) {
    throw InternalError("document transition at " + to_string(node) +
                        " has no mass");
  }
  const double u = rng.next_unit() * sum;
  double cum = 0.0;
  std::size_t pick = weights.size() - 1;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    cum += weights[i];
    if (u < cum) {
      pick = i;
      break;
    }
  }
  if (pick < state.atoms.size()) {
    return node.child(static_cast<std::uint32_t>(state.atoms[pick]));
  }
  return node.child(resolve_new_child(node, state, rng));
}

std::vector<NodePath> DocumentTree::materialized() const {
  std::vector<NodePath> out;
  out.reserve(states_.size());
  for (const auto& [path, state] : states_) out.push_back(path);
  return out;
}

NodePath sample_word_path(DocumentTree& doc_tree, Rng& rng) {
  NodePath at;
  for (;;) {
    const double stop = doc_tree.switch_probability(at, rng);
    if (stop >= 1.0 || rng.next_unit() < stop) return at;
    at = doc_tree.sample_child(at, rng);
  }
}

NhdpDocument generate_nhdp_document(GlobalTree& tree, DocumentTree& doc_tree,
                                    std::size_t n_words, Rng& rng) {
  NhdpDocument doc;
  doc.doc_id = doc_tree.doc_id();
  doc.words.reserve(n_words);
  doc.assignments.reserve(n_words);
  for (std::size_t i = 0; i < n_words; ++i) {
    NodePath at = sample_word_path(doc_tree, rng);
    const Simplex& topic = tree.node(at).topic;
    doc.words.push_back(
        static_cast<std::uint32_t>(sample_discrete(topic, rng)));
    doc.assignments.push_back(std::move(at));
  }
  return doc;
}

GeneratedCorpus generate_nhdp_corpus(GlobalTree& tree, std::size_t n_docs,
                                     std::size_t words_per_doc,
                                     const NhdpPriors& priors, Rng& rng) {
  return generate_nhdp_corpus(
      tree, std::vector<std::size_t>(n_docs, words_per_doc), priors, rng);
}

GeneratedCorpus generate_nhdp_corpus(GlobalTree& tree,
                                     const std::vector<std::size_t>& doc_sizes,
                                     const NhdpPriors& priors, Rng& rng) {
  GeneratedCorpus out;
  out.corpus.vocab = synthetic_vocab(tree.vocab_size());
  for (std::size_t d = 0; d < doc_sizes.size(); ++d) {
    DocumentTree doc_tree(tree, priors.doc_concentration, priors.switch_prior,
                          d);
    NhdpDocument doc =
        generate_nhdp_document(tree, doc_tree, doc_sizes[d], rng);
    out.corpus.docs.push_back(std::move(doc.words));
    out.assignments.push_back(std::move(doc.assignments));
  }
  return out;
}

}  // namespace nhdp
