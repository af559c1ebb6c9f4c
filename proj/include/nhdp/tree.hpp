#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "nhdp/random.hpp"

namespace nhdp {

// Address of a tree node: the child indices taken from the root.
// Empty = root. Lexicographic order puts every node before its descendants,
// which is what deterministic exports iterate in.
struct NodePath {
  std::vector<std::uint32_t> indices;

  NodePath() = default;
  explicit NodePath(std::vector<std::uint32_t> idx) : indices(std::move(idx)) {}

  std::size_t depth() const { return indices.size(); }
  bool is_root() const { return indices.empty(); }

  NodePath parent() const;
  NodePath child(std::uint32_t index) const;
  NodePath prefix(std::size_t len) const;

  // Ancestor-or-self relation.
  bool is_prefix_of(const NodePath& other) const;

  auto operator<=>(const NodePath&) const = default;
};

std::string to_string(const NodePath& path);

struct TopicNode {
  NodePath path;
  Simplex topic;
  // CRP seat counts per instantiated child, indexed by child index.
  std::vector<std::uint64_t> child_counts;
};

// The truncated shared tree: a registry of instantiated nodes keyed by path,
// plus the CRP child-selection rule. Truncation is by max depth and a
// per-level cap on children. The registry is prefix-closed and the root is
// always present.
class GlobalTree {
 public:
  GlobalTree(std::size_t vocab_size, std::size_t max_depth,
             std::vector<std::size_t> child_caps, double alpha, double eta,
             Rng& rng);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t max_depth() const { return max_depth_; }
  const std::vector<std::size_t>& child_caps() const { return child_caps_; }
  double eta() const { return eta_; }
  double alpha() const { return alpha_; }

  // Concentration used at a given parent depth. Defaults to the shared
  // alpha; set_level_alphas installs a per-level override.
  double alpha_at(std::size_t depth) const;
  void set_level_alphas(std::vector<double> alphas);

  bool contains(const NodePath& path) const;
  const TopicNode& node(const NodePath& path) const;
  std::size_t node_count() const { return nodes_.size(); }
  const std::map<NodePath, TopicNode>& nodes() const { return nodes_; }

  // Seat counts over existing children plus the trailing new-child slot.
  // With the cap reached the slot carries probability zero and the existing
  // children are renormalized.
  Simplex crp_child_probabilities(const NodePath& path) const;

  // Draws from crp_child_probabilities, instantiating on a new-child draw,
  // and seats the chosen child (count += 1).
  NodePath sample_child(const NodePath& path, Rng& rng);

  // Chains sample_child from the root down to max depth.
  NodePath sample_path(Rng& rng);

  // Registers the next child of `parent` with a fresh Dirichlet(eta) topic
  // and seat count 1. Throws if the cap is reached.
  NodePath instantiate_child(const NodePath& parent, Rng& rng);

  // Seats an existing child once without sampling.
  void record_child_selection(const NodePath& parent, std::uint32_t child);

  void set_topic(const NodePath& path, Simplex topic);

 private:
  TopicNode& node_mut(const NodePath& path);
  Simplex draw_topic(Rng& rng) const;

  std::size_t vocab_size_;
  std::size_t max_depth_;
  std::vector<std::size_t> child_caps_;
  double alpha_;
  double eta_;
  std::vector<double> level_alphas_;  // empty = shared alpha
  std::map<NodePath, TopicNode> nodes_;
};

}  // namespace nhdp
