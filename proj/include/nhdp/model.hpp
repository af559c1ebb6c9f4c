#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nhdp/nhdp.hpp"
#include "nhdp/tree.hpp"

namespace nhdp {

// Hyperparameters that define the truncated model (shared between
// generation-side defaults and inference).
struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t depth = 3;
  std::vector<std::size_t> child_caps = {20, 10, 5};
  double alpha = 5.0;
  double eta = 0.1;
  double doc_concentration = 1.0;
  SwitchPrior switch_prior{};

  void validate() const;
};

// One node of a fitted (or planted) model. Word counts are sparse and
// fractional: averaging several posterior snapshots yields non-integers.
struct ModelNode {
  NodePath path;
  double total = 0.0;
  std::vector<std::pair<std::uint32_t, double>> word_counts;  // sorted
  std::vector<double> child_usage;  // transition usage per child index

  double word_count(std::uint32_t word) const;
};

// Point estimate of the model: smoothed count tables for every node of the
// truncated tree (path lexicographic order), plus per-document weight
// summaries. Topic means are derived as (count + eta) / (total + V * eta),
// so a node with no mass reports the uniform prior mean.
struct ModelEstimate {
  ModelConfig config;
  std::vector<ModelNode> nodes;
  std::vector<std::vector<std::pair<std::size_t, double>>> doc_weights;
  std::vector<std::uint64_t> depth_histogram;

  double topic_probability(std::size_t node, std::uint32_t word) const;
  std::vector<double> topic(std::size_t node) const;
  bool dormant(std::size_t node) const { return !(nodes[node].total > 0.0); }
  std::size_t active_node_count() const;

  // Training word frequencies with the same eta smoothing.
  std::vector<double> unigram_distribution() const;

  void validate() const;
};

void save_model(const ModelEstimate& model, const std::string& path);
ModelEstimate load_model(const std::string& path);

// Deterministic JSON export: nodes in path order, sorted keys, floats fixed
// to six decimals. Re-exporting the same model is byte-identical.
void export_tree_json(const ModelEstimate& model,
                      const std::vector<std::string>& vocab,
                      const std::string& path, std::size_t top_n,
                      bool active_only);
void export_tree_json(const GlobalTree& tree,
                      const std::vector<std::string>& vocab,
                      const std::string& path, std::size_t top_n);

// GraphViz export; the root and its depth-1 children are shaded.
void export_tree_dot(const ModelEstimate& model,
                     const std::vector<std::string>& vocab,
                     const std::string& path, std::size_t top_k);
void export_tree_dot(const GlobalTree& tree,
                     const std::vector<std::string>& vocab,
                     const std::string& path, std::size_t top_k);

}  // namespace nhdp
