#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nhdp/corpus.hpp"
#include "nhdp/model.hpp"
#include "nhdp/random.hpp"

namespace nhdp {

// Dense enumeration of every path inside the truncation: node 0 is the root
// and nodes appear in path lexicographic order, so a parent always precedes
// its descendants.
class CandidateTree {
 public:
  CandidateTree() = default;
  CandidateTree(std::size_t depth, const std::vector<std::size_t>& caps);

  std::size_t size() const { return paths_.size(); }
  std::size_t depth() const { return depth_; }
  const NodePath& path(std::size_t node) const { return paths_[node]; }
  std::size_t node_depth(std::size_t node) const { return depths_[node]; }
  // Parent of node (node != 0).
  std::size_t parent(std::size_t node) const { return parents_[node]; }
  const std::vector<std::size_t>& children(std::size_t node) const {
    return children_[node];
  }
  std::size_t index_of(const NodePath& path) const;

 private:
  std::size_t depth_ = 0;
  std::vector<NodePath> paths_;
  std::vector<std::size_t> parents_;
  std::vector<std::size_t> depths_;
  std::vector<std::vector<std::size_t>> children_;
  std::map<NodePath, std::size_t> index_;
};

struct EvalOptions {
  double heldout_split = 0.5;  // leading fraction used to fit doc weights
  std::size_t fit_sweeps = 50;
  std::size_t fit_burn_in = 25;

  void validate() const;
};

struct InferenceConfig {
  ModelConfig model;
  std::size_t n_iterations = 2000;
  std::size_t burn_in = 500;
  std::uint64_t seed = 1;
  EvalOptions eval;

  void validate() const;
};

struct SweepStats {
  std::size_t iteration = 0;
  double log_joint = 0.0;
  std::size_t words_moved = 0;
  std::vector<std::uint64_t> depth_histogram;
};

// `iter=<n> logjoint=<float> depths=<h0,h1,...>`
std::string format_diagnostics_line(const SweepStats& stats);

struct WordConditional {
  // candidates[i] is the node id scored by probabilities[i]; the list always
  // covers the full truncated tree.
  std::vector<std::size_t> candidates;
  Simplex probabilities;
};

// Collapsed Gibbs state over per-word node assignments. Topics, switches and
// document transitions are integrated out, leaving count tables:
//   - topic-word counts per node (shared across documents),
//   - per-document stop/pass counts per node,
//   - per-document transition counts per edge, smoothed by a global base
//     that is re-aggregated from document usage once per sweep.
//
// Every table is a deterministic function of (words, assignments);
// check_consistency() recomputes them from scratch and compares.
class GibbsState {
 public:
  GibbsState(const Corpus& corpus, const InferenceConfig& config, Rng& rng);

  const InferenceConfig& config() const { return config_; }
  const CandidateTree& candidates() const { return tree_; }
  std::size_t doc_count() const { return words_.size(); }
  std::size_t doc_size(std::size_t doc) const { return words_[doc].size(); }
  std::size_t vocab_size() const { return vocab_size_; }

  std::uint32_t word(std::size_t doc, std::size_t pos) const {
    return words_[doc][pos];
  }
  std::size_t assignment(std::size_t doc, std::size_t pos) const {
    return assign_[doc][pos];
  }
  const NodePath& assignment_path(std::size_t doc, std::size_t pos) const {
    return tree_.path(assign_[doc][pos]);
  }

  // Count accessors (primarily for tests and model estimation).
  std::int64_t topic_word_count(std::size_t node, std::uint32_t word) const;
  std::int64_t topic_total(std::size_t node) const { return topic_total_[node]; }
  std::int64_t stop_count(std::size_t doc, std::size_t node) const;
  std::int64_t pass_count(std::size_t doc, std::size_t node) const;
  std::int64_t transition_count(std::size_t doc, std::size_t child_node) const;

  // Removes a word from all tables ahead of resampling it. Exactly one word
  // may be detached at a time.
  void decrement_word(std::size_t doc, std::size_t pos);
  void increment_word(std::size_t doc, std::size_t pos, std::size_t node);

  // Collapsed conditional for the detached word over all candidate nodes.
  WordConditional word_conditional(std::size_t doc, std::size_t pos);

  // Re-aggregates global transition usage and the smoothing base from the
  // current per-document counts. Runs automatically at each sweep start.
  void refresh_global_base();

  // One full pass: every document, every word in deterministic order.
  SweepStats sweep(Rng& rng);

  // Collapsed joint log probability of (assignments, words), recomputed
  // from the current tables. Reproducible bit-for-bit from state.
  double log_joint() const;

  // Moves a word without the decrement/increment protocol (oracle harness).
  void set_assignment(std::size_t doc, std::size_t pos, std::size_t node);

  // Rebuilds all tables from scratch and compares; throws InternalError on
  // any mismatch.
  void check_consistency() const;

  // Replaces every word with a draw from the collapsed word predictive
  // given the current assignments, in deterministic order. This is the
  // data-regeneration half of a forward/successive-conditional sampler
  // validation loop.
  void regenerate_words(Rng& rng);

  std::vector<std::uint64_t> depth_histogram() const;

 private:
  void attach(std::size_t doc, std::size_t pos, std::size_t node);
  void detach(std::size_t doc, std::size_t pos);
  void ensure_scratch(std::size_t doc);
  void refresh_scratch_edge(std::size_t doc, std::size_t child);
  void score_word(std::size_t doc, std::uint32_t word);
  void init_assignments(Rng& rng);

  InferenceConfig config_;
  CandidateTree tree_;
  std::size_t vocab_size_ = 0;
  double veta_ = 0.0;

  std::vector<std::vector<std::uint32_t>> words_;
  std::vector<std::vector<std::uint32_t>> assign_;

  // Shared topic tables.
  std::vector<std::vector<std::int32_t>> topic_word_;  // [node][word]
  std::vector<std::int64_t> topic_total_;

  // Per-document structural tables: [doc][node].
  std::vector<std::vector<std::int32_t>> stop_;
  std::vector<std::vector<std::int32_t>> pass_;
  std::vector<std::vector<std::int32_t>> trans_;  // edge into node

  // Global smoothing base, refreshed once per sweep.
  std::vector<std::int64_t> global_usage_;
  std::vector<double> conc_base_;  // doc_concentration * base weight per edge

  // Log tables over small integer counts.
  std::vector<double> lp_eta_;    // log(k + eta)
  std::vector<double> lp_veta_;   // log(k + V * eta)
  std::vector<double> lp_a_;      // log(k + a)
  std::vector<double> lp_b_;      // log(k + b)
  std::vector<double> lp_ab_;     // log(k + a + b)
  std::vector<double> lp_conc_;   // log(k + doc_concentration)

  // Scratch for the document currently being swept.
  std::size_t scratch_doc_ = SIZE_MAX;
  std::vector<double> log_trans_num_;  // log(trans + conc * base) per edge
  std::vector<double> acc_;
  std::vector<double> score_;

  std::size_t sweeps_done_ = 0;
  std::optional<std::pair<std::size_t, std::size_t>> detached_;
};

ModelEstimate estimate_model(const GibbsState& state);
// Averages topic/usage tables over several posterior snapshots.
ModelEstimate estimate_model(const std::vector<const GibbsState*>& states);

struct PerplexityReport {
  double nhdp = 0.0;
  double unigram = 0.0;
  std::size_t docs_used = 0;
  std::size_t docs_skipped = 0;
  std::size_t eval_tokens = 0;
};

// Document-completion evaluation: per-document weights are fitted on the
// leading split of each held-out document with all global tables frozen;
// the per-word predictive is averaged over post-burn-in fit sweeps and
// scored on the remaining tokens.
PerplexityReport heldout_perplexity(const ModelEstimate& model,
                                    const Corpus& heldout,
                                    const EvalOptions& options, Rng& rng);

}  // namespace nhdp
