#include "nhdp/tree.hpp"

#include <algorithm>

namespace nhdp {

NodePath NodePath::parent() const {
  if (is_root()) throw InternalError("root has no parent");
  NodePath p;
  p.indices.assign(indices.begin(), indices.end() - 1);
  return p;
}

NodePath NodePath::child(std::uint32_t index) const {
  NodePath c;
  c.indices = indices;
  c.indices.push_back(index);
  return c;
}

NodePath NodePath::prefix(std::size_t len) const {
  if (len > indices.size()) throw InternalError("prefix longer than path");
  NodePath p;
  p.indices.assign(indices.begin(), indices.begin() + len);
  return p;
}

bool NodePath::is_prefix_of(const NodePath& other) const {
  if (depth() > other.depth()) return false;
  return std::equal(indices.begin(), indices.end(), other.indices.begin());
}

std::string to_string(const NodePath& path) {
  std::string out = "(";
  for (std::size_t i = 0; i < path.indices.size(); ++i) {
    if (i > 0) out += ",";
    out += std::to_string(path.indices[i]);
  }
  out += ")";
  return out;
}

GlobalTree::GlobalTree(std::size_t vocab_size, std::size_t max_depth,
                       std::vector<std::size_t> child_caps, double alpha,
                       double eta, Rng& rng)
    : vocab_size_(vocab_size),
      max_depth_(max_depth),
      child_caps_(std::move(child_caps)),
      alpha_(alpha),
      eta_(eta) {
  if (vocab_size_ < 2) throw ConfigError("vocab size must be >= 2");
  if (max_depth_ < 1) throw ConfigError("max depth must be >= 1");
  if (child_caps_.size() != max_depth_) {
    throw ConfigError("need one child cap per level (got " +
                      std::to_string(child_caps_.size()) + ", want " +
                      std::to_string(max_depth_) + ")");
  }
  for (std::size_t cap : child_caps_) {
    if (cap < 1) throw ConfigError("child caps must be >= 1");
  }
  if (!(alpha_ > 0.0)) throw ConfigError("alpha must be positive");
  if (!(eta_ > 0.0)) throw ConfigError("eta must be positive");

  TopicNode root{NodePath{}, draw_topic(rng), {}};
  nodes_.emplace(NodePath{}, std::move(root));
}

double GlobalTree::alpha_at(std::size_t depth) const {
  if (level_alphas_.empty()) return alpha_;
  return level_alphas_.at(depth);
}

void GlobalTree::set_level_alphas(std::vector<double> alphas) {
  if (alphas.size() != max_depth_) {
    throw ConfigError("need one alpha per level");
  }
  for (double a : alphas) {
    if (!(a > 0.0)) throw ConfigError("alpha must be positive");
  }
  level_alphas_ = std::move(alphas);
}

bool GlobalTree::contains(const NodePath& path) const {
  return nodes_.find(path) != nodes_.end();
}

const TopicNode& GlobalTree::node(const NodePath& path) const {
  auto it = nodes_.find(path);
  if (it == nodes_.end()) {
    throw ConfigError("node " + to_string(path) + " not registered");
  }
  return it->second;
}

TopicNode& GlobalTree::node_mut(const NodePath& path) {
  auto it = nodes_.find(path);
  if (it == nodes_.end()) {
    throw ConfigError("node " + to_string(path) + " not registered");
  }
  return it->second;
}

Simplex GlobalTree::draw_topic(Rng& rng) const {
  std::vector<double> alpha(vocab_size_, eta_);
  return sample_dirichlet(alpha, rng);
}

Simplex GlobalTree::crp_child_probabilities(const NodePath& path) const {
  const TopicNode& n = node(path);
  if (path.depth() >= max_depth_) {
    throw ConfigError("node " + to_string(path) +
                      " is at leaf level; it has no children");
  }
  const std::size_t cap = child_caps_[path.depth()];
  const std::size_t k = n.child_counts.size();
  std::vector<double> w(k + 1, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < k; ++i) total += double(n.child_counts[i]);
  if (k < cap) {
    const double a = alpha_at(path.depth());
    for (std::size_t i = 0; i < k; ++i) {
      w[i] = double(n.child_counts[i]) / (total + a);
    }
    w[k] = a / (total + a);
  } else {
    // Cap reached: no new-child mass, renormalize over existing children.
    for (std::size_t i = 0; i < k; ++i) {
      w[i] = double(n.child_counts[i]) / total;
    }
  }
  return Simplex(std::move(w));
}

NodePath GlobalTree::sample_child(const NodePath& path, Rng& rng) {
  const Simplex probs = crp_child_probabilities(path);
  const std::size_t pick = sample_discrete(probs, rng);
  const std::size_t k = node(path).child_counts.size();
  if (pick == k) {
    return instantiate_child(path, rng);  // seat count starts at 1
  }
  record_child_selection(path, static_cast<std::uint32_t>(pick));
  return path.child(static_cast<std::uint32_t>(pick));
}

NodePath GlobalTree::sample_path(Rng& rng) {
  NodePath at;
  for (std::size_t level = 0; level < max_depth_; ++level) {
    at = sample_child(at, rng);
  }
  return at;
}

NodePath GlobalTree::instantiate_child(const NodePath& parent, Rng& rng) {
  TopicNode& p = node_mut(parent);
  if (parent.depth() >= max_depth_) {
    throw ConfigError("cannot add children below max depth");
  }
  const std::size_t cap = child_caps_[parent.depth()];
  if (p.child_counts.size() >= cap) {
    throw ConfigError("child cap reached at " + to_string(parent));
  }
  const auto index = static_cast<std::uint32_t>(p.child_counts.size());
  p.child_counts.push_back(1);
  NodePath path = parent.child(index);
  TopicNode child{path, draw_topic(rng), {}};
  nodes_.emplace(path, std::move(child));
  return path;
}

void GlobalTree::record_child_selection(const NodePath& parent,
                                        std::uint32_t child) {
  TopicNode& p = node_mut(parent);
  if (child >= p.child_counts.size()) {
    throw ConfigError("child " + std::to_string(child) +
                      " not instantiated under " + to_string(parent));
  }
  p.child_counts[child] += 1;
}

void GlobalTree::set_topic(const NodePath& path, Simplex topic) {
  if (topic.size() != vocab_size_) {
    throw ConfigError("topic length must equal vocab size");
  }
  node_mut(path).topic = std::move(topic);
}

}  // namespace nhdp
