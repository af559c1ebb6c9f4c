#include "nhdp/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <map>
#include <unordered_map>

namespace nhdp {

namespace {

double lbeta(double x, double y) {
  return std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y);
}

std::vector<double> log_table(std::size_t size, double offset) {
  std::vector<double> t(size);
  for (std::size_t k = 0; k < size; ++k) {
    t[k] = std::log(double(k) + offset);
  }
  return t;
}

}  // namespace

CandidateTree::CandidateTree(std::size_t depth,
                             const std::vector<std::size_t>& caps)
    : depth_(depth) {
  if (caps.size() != depth) {
    throw ConfigError("need one child cap per level");
  }
  // Path lexicographic order coincides with a preorder walk that visits
  // children in index order.
  struct Frame {
    NodePath path;
    std::size_t parent;
  };
  std::vector<Frame> stack;
  stack.push_back({NodePath{}, SIZE_MAX});
  while (!stack.empty()) {
    Frame frame = std::move(stack.back());
    stack.pop_back();
    const std::size_t id = paths_.size();
    index_.emplace(frame.path, id);
    parents_.push_back(frame.parent);
    depths_.push_back(frame.path.depth());
    children_.emplace_back();
    if (frame.parent != SIZE_MAX) children_[frame.parent].push_back(id);
    const std::size_t d = frame.path.depth();
    if (d < depth_) {
      // Reverse order so child 0 pops first.
      for (std::size_t c = caps[d]; c-- > 0;) {
        stack.push_back({frame.path.child(static_cast<std::uint32_t>(c)), id});
      }
    }
    paths_.push_back(std::move(frame.path));
  }
}

std::size_t CandidateTree::index_of(const NodePath& path) const {
  auto it = index_.find(path);
  if (it == index_.end()) {
    throw ConfigError("path " + to_string(path) + " outside truncation");
  }
  return it->second;
}

void EvalOptions::validate() const {
  if (!(heldout_split > 0.0) || !(heldout_split < 1.0)) {
    throw ConfigError("held-out split fraction must lie in (0, 1)");
  }
  if (fit_sweeps < 1) throw ConfigError("need at least one fit sweep");
  if (fit_burn_in >= fit_sweeps) {
    throw ConfigError("fit burn-in must be below fit sweeps");
  }
}

void InferenceConfig::validate() const {
  model.validate();
  if (n_iterations < 1) throw ConfigError("need at least one iteration");
  if (burn_in >= n_iterations) {
    throw ConfigError("burn-in must be below the iteration count");
  }
  eval.validate();
}

std::string format_diagnostics_line(const SweepStats& stats) {
  char head[128];
  std::snprintf(head, sizeof(head), "iter=%zu logjoint=%.6f depths=",
                stats.iteration, stats.log_joint);
  std::string line(head);
  for (std::size_t i = 0; i < stats.depth_histogram.size(); ++i) {
    if (i > 0) line += ",";
    line += std::to_string(stats.depth_histogram[i]);
  }
  return line;
}

GibbsState::GibbsState(const Corpus& corpus, const InferenceConfig& config,
                       Rng& rng)
    : config_(config) {
  corpus.validate();
  if (config_.model.vocab_size == 0) {
    config_.model.vocab_size = corpus.vocab_size();
  }
  config_.validate();
  if (corpus.vocab_size() > config_.model.vocab_size) {
    throw ConfigError("corpus vocabulary (" +
                      std::to_string(corpus.vocab_size()) +
                      ") exceeds configured size " +
                      std::to_string(config_.model.vocab_size));
  }
  vocab_size_ = config_.model.vocab_size;
  veta_ = double(vocab_size_) * config_.model.eta;
  tree_ = CandidateTree(config_.model.depth, config_.model.child_caps);

  words_ = corpus.docs;
  assign_.resize(words_.size());
  const std::size_t n_nodes = tree_.size();
  const std::size_t n_docs = words_.size();
  topic_word_.assign(n_nodes, std::vector<std::int32_t>(vocab_size_, 0));
  topic_total_.assign(n_nodes, 0);
  stop_.assign(n_docs, std::vector<std::int32_t>(n_nodes, 0));
  pass_.assign(n_docs, std::vector<std::int32_t>(n_nodes, 0));
  trans_.assign(n_docs, std::vector<std::int32_t>(n_nodes, 0));
  global_usage_.assign(n_nodes, 0);
  conc_base_.assign(n_nodes, 0.0);

  std::size_t max_doc = 0;
  std::size_t total = 0;
  for (const auto& d : words_) {
    max_doc = std::max(max_doc, d.size());
    total += d.size();
  }
  const auto& m = config_.model;
  lp_eta_ = log_table(total + 2, m.eta);
  lp_veta_ = log_table(total + 2, veta_);
  lp_a_ = log_table(max_doc + 2, m.switch_prior.a);
  lp_b_ = log_table(max_doc + 2, m.switch_prior.b);
  lp_ab_ = log_table(max_doc + 2, m.switch_prior.a + m.switch_prior.b);
  lp_conc_ = log_table(max_doc + 2, m.doc_concentration);

  log_trans_num_.assign(n_nodes, 0.0);
  acc_.assign(n_nodes, 0.0);
  score_.assign(n_nodes, 0.0);

  init_assignments(rng);
  refresh_global_base();
}

std::int64_t GibbsState::topic_word_count(std::size_t node,
                                          std::uint32_t word) const {
  return topic_word_[node][word];
}

std::int64_t GibbsState::stop_count(std::size_t doc, std::size_t node) const {
  return stop_[doc][node];
}

std::int64_t GibbsState::pass_count(std::size_t doc, std::size_t node) const {
  return pass_[doc][node];
}

std::int64_t GibbsState::transition_count(std::size_t doc,
                                          std::size_t child_node) const {
  return trans_[doc][child_node];
}

void GibbsState::attach(std::size_t doc, std::size_t pos, std::size_t node) {
  const std::uint32_t w = words_[doc][pos];
  assign_[doc][pos] = static_cast<std::uint32_t>(node);
  stop_[doc][node] += 1;
  topic_word_[node][w] += 1;
  topic_total_[node] += 1;
  std::size_t at = node;
  while (at != 0) {
    const std::size_t up = tree_.parent(at);
    trans_[doc][at] += 1;
    pass_[doc][up] += 1;
    if (scratch_doc_ == doc) refresh_scratch_edge(doc, at);
    at = up;
  }
}

void GibbsState::detach(std::size_t doc, std::size_t pos) {
  const std::uint32_t w = words_[doc][pos];
  const std::size_t node = assign_[doc][pos];
  stop_[doc][node] -= 1;
  topic_word_[node][w] -= 1;
  topic_total_[node] -= 1;
  if (stop_[doc][node] < 0 || topic_word_[node][w] < 0) {
    throw InternalError("count table went negative");
  }
  std::size_t at = node;
  while (at != 0) {
    const std::size_t up = tree_.parent(at);
    trans_[doc][at] -= 1;
    pass_[doc][up] -= 1;
    if (trans_[doc][at] < 0 || pass_[doc][up] < 0) {
      throw InternalError("count table went negative");
    }
    if (scratch_doc_ == doc) refresh_scratch_edge(doc, at);
    at = up;
  }
}

void GibbsState::decrement_word(std::size_t doc, std::size_t pos) {
  if (detached_) {
    throw InternalError("a word is already detached");
  }
  detach(doc, pos);
  detached_ = {doc, pos};
}

void GibbsState::increment_word(std::size_t doc, std::size_t pos,
                                std::size_t node) {
  if (!detached_ || detached_->first != doc || detached_->second != pos) {
    throw InternalError("increment does not match the detached word");
  }
  if (node >= tree_.size()) throw InternalError("node id out of range");
  attach(doc, pos, node);
  detached_.reset();
}

void GibbsState::set_assignment(std::size_t doc, std::size_t pos,
                                std::size_t node) {
  if (detached_) {
    throw InternalError("cannot move words while one is detached");
  }
  if (node >= tree_.size()) throw ConfigError("node id out of range");
  detach(doc, pos);
  attach(doc, pos, node);
}

void GibbsState::refresh_scratch_edge(std::size_t doc, std::size_t child) {
  log_trans_num_[child] =
      std::log(double(trans_[doc][child]) + conc_base_[child]);
}

void GibbsState::ensure_scratch(std::size_t doc) {
  if (scratch_doc_ == doc) return;
  scratch_doc_ = doc;
  for (std::size_t c = 1; c < tree_.size(); ++c) {
    log_trans_num_[c] = std::log(double(trans_[doc][c]) + conc_base_[c]);
  }
}

void GibbsState::refresh_global_base() {
  const std::size_t n_nodes = tree_.size();
  std::fill(global_usage_.begin(), global_usage_.end(), 0);
  for (const auto& doc_trans : trans_) {
    for (std::size_t c = 1; c < n_nodes; ++c) {
      global_usage_[c] += doc_trans[c];
    }
  }
  const double alpha = config_.model.alpha;
  const double conc = config_.model.doc_concentration;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    const auto& kids = tree_.children(v);
    if (kids.empty()) continue;
    double out = 0.0;
    for (std::size_t c : kids) out += double(global_usage_[c]);
    const double spread = alpha / double(kids.size());
    for (std::size_t c : kids) {
      conc_base_[c] = conc * (double(global_usage_[c]) + spread) / (out + alpha);
    }
  }
  scratch_doc_ = SIZE_MAX;  // cached numerators embed the old base
}

// Collapsed score of assigning the current word to every candidate node:
// along the root-to-node walk each edge contributes the document's
// continue predictive times its transition predictive, the node itself
// contributes the stop predictive (forced at max depth) and the
// Dirichlet-multinomial word predictive.
void GibbsState::score_word(std::size_t doc, std::uint32_t word) {
  const auto& stop = stop_[doc];
  const auto& pass = pass_[doc];
  const std::size_t n_nodes = tree_.size();
  const std::size_t max_depth = tree_.depth();
  acc_[0] = 0.0;
  for (std::size_t u = 0; u < n_nodes; ++u) {
    if (u != 0) {
      const std::size_t v = tree_.parent(u);
      acc_[u] = acc_[v] + lp_b_[pass[v]] - lp_ab_[stop[v] + pass[v]] +
                log_trans_num_[u] - lp_conc_[pass[v]];
    }
    double s = acc_[u] + lp_eta_[topic_word_[u][word]] -
               lp_veta_[topic_total_[u]];
    if (tree_.node_depth(u) < max_depth) {
      s += lp_a_[stop[u]] - lp_ab_[stop[u] + pass[u]];
    }
    score_[u] = s;
  }
}

WordConditional GibbsState::word_conditional(std::size_t doc,
                                             std::size_t pos) {
  if (!detached_ || detached_->first != doc || detached_->second != pos) {
    throw InternalError(
        "word_conditional requires the word to be decremented first");
  }
  ensure_scratch(doc);
  score_word(doc, words_[doc][pos]);
  const double lse = log_sum_exp(score_);
  std::vector<double> probs(tree_.size());
  std::vector<std::size_t> candidates(tree_.size());
  for (std::size_t u = 0; u < tree_.size(); ++u) {
    candidates[u] = u;
    probs[u] = std::exp(score_[u] - lse);
  }
  return WordConditional{std::move(candidates), Simplex(std::move(probs))};
}

SweepStats GibbsState::sweep(Rng& rng) {
  refresh_global_base();
  std::size_t moved = 0;
  const std::size_t n_nodes = tree_.size();
  for (std::size_t d = 0; d < words_.size(); ++d) {
    ensure_scratch(d);
    for (std::size_t n = 0; n < words_[d].size(); ++n) {
      const std::size_t old = assign_[d][n];
      decrement_word(d, n);
      score_word(d, words_[d][n]);
      double m = score_[0];
      for (std::size_t u = 1; u < n_nodes; ++u) m = std::max(m, score_[u]);
      double total = 0.0;
      for (std::size_t u = 0; u < n_nodes; ++u) {
        acc_[u] = std::exp(score_[u] - m);  // reuse acc_ as linear weights
        total += acc_[u];
      }
      const double u01 = rng.next_unit() * total;
      double cum = 0.0;
      std::size_t pick = n_nodes - 1;
      for (std::size_t u = 0; u < n_nodes; ++u) {
        cum += acc_[u];
        if (u01 < cum) {
          pick = u;
          break;
        }
      }
      increment_word(d, n, pick);
      if (pick != old) ++moved;
    }
  }
  ++sweeps_done_;
  SweepStats stats;
  stats.iteration = sweeps_done_;
  stats.log_joint = log_joint();
  stats.words_moved = moved;
  stats.depth_histogram = depth_histogram();
  return stats;
}

double GibbsState::log_joint() const {
  const auto& m = config_.model;
  const std::size_t n_nodes = tree_.size();
  const std::size_t max_depth = tree_.depth();
  double sum = 0.0;

  // Switch component: collapsed beta-Bernoulli per (document, inner node).
  const double lbeta0 = lbeta(m.switch_prior.a, m.switch_prior.b);
  for (std::size_t d = 0; d < words_.size(); ++d) {
    for (std::size_t v = 0; v < n_nodes; ++v) {
      if (tree_.node_depth(v) >= max_depth) continue;
      const std::int64_t s = stop_[d][v];
      const std::int64_t p = pass_[d][v];
      if (s + p == 0) continue;
      sum += lbeta(m.switch_prior.a + double(s), m.switch_prior.b + double(p)) -
             lbeta0;
    }
  }

  // Topic component: Dirichlet-multinomial per node.
  const double lg_eta = std::lgamma(m.eta);
  for (std::size_t u = 0; u < n_nodes; ++u) {
    if (topic_total_[u] == 0) continue;
    sum += std::lgamma(veta_) - std::lgamma(veta_ + double(topic_total_[u]));
    for (std::size_t w = 0; w < vocab_size_; ++w) {
      const std::int32_t c = topic_word_[u][w];
      if (c > 0) sum += std::lgamma(m.eta + double(c)) - lg_eta;
    }
  }

  // Transition component: per-document urns against the aggregate base,
  // recomputed here so the value is a pure function of the current state.
  std::vector<double> cb(n_nodes, 0.0);
  {
    std::vector<std::int64_t> usage(n_nodes, 0);
    for (const auto& doc_trans : trans_) {
      for (std::size_t c = 1; c < n_nodes; ++c) usage[c] += doc_trans[c];
    }
    for (std::size_t v = 0; v < n_nodes; ++v) {
      const auto& kids = tree_.children(v);
      if (kids.empty()) continue;
      double out = 0.0;
      for (std::size_t c : kids) out += double(usage[c]);
      const double spread = m.alpha / double(kids.size());
      for (std::size_t c : kids) {
        cb[c] = m.doc_concentration * (double(usage[c]) + spread) /
                (out + m.alpha);
      }
    }
  }
  const double lg_conc = std::lgamma(m.doc_concentration);
  for (std::size_t d = 0; d < words_.size(); ++d) {
    for (std::size_t v = 0; v < n_nodes; ++v) {
      if (tree_.node_depth(v) >= max_depth) continue;
      if (pass_[d][v] == 0) continue;
      sum += lg_conc -
             std::lgamma(m.doc_concentration + double(pass_[d][v]));
      for (std::size_t c : tree_.children(v)) {
        const std::int32_t n = trans_[d][c];
        if (n > 0) sum += std::lgamma(cb[c] + double(n)) - std::lgamma(cb[c]);
      }
    }
  }
  return sum;
}

void GibbsState::init_assignments(Rng& rng) {
  refresh_global_base();  // all-zero usage: uniform spread of alpha
  const auto& m = config_.model;
  const std::size_t max_depth = tree_.depth();
  for (std::size_t d = 0; d < words_.size(); ++d) {
    assign_[d].assign(words_[d].size(), 0);
    for (std::size_t n = 0; n < words_[d].size(); ++n) {
      // Forward draw from the document's structural predictive given its
      // earlier words; the word identity is deliberately ignored.
      std::size_t at = 0;
      for (;;) {
        if (tree_.node_depth(at) >= max_depth) break;
        const double s = double(stop_[d][at]);
        const double p = double(pass_[d][at]);
        const double stop_prob = (m.switch_prior.a + s) /
                                 (m.switch_prior.a + m.switch_prior.b + s + p);
        if (rng.next_unit() < stop_prob) break;
        const auto& kids = tree_.children(at);
        double total = 0.0;
        for (std::size_t c : kids) {
          total += double(trans_[d][c]) + conc_base_[c];
        }
        double u01 = rng.next_unit() * total;
        std::size_t pick = kids.back();
        for (std::size_t c : kids) {
          u01 -= double(trans_[d][c]) + conc_base_[c];
          if (u01 < 0.0) {
            pick = c;
            break;
          }
        }
        at = pick;
      }
      attach(d, n, at);
    }
  }
}

void GibbsState::check_consistency() const {
  if (detached_) {
    throw InternalError("consistency check with a detached word");
  }
  const std::size_t n_nodes = tree_.size();
  std::vector<std::vector<std::int32_t>> topic_word(
      n_nodes, std::vector<std::int32_t>(vocab_size_, 0));
  std::vector<std::int64_t> topic_total(n_nodes, 0);
  for (std::size_t d = 0; d < words_.size(); ++d) {
    std::vector<std::int32_t> stop(n_nodes, 0), pass(n_nodes, 0),
        trans(n_nodes, 0);
    for (std::size_t n = 0; n < words_[d].size(); ++n) {
      const std::size_t node = assign_[d][n];
      const std::uint32_t w = words_[d][n];
      topic_word[node][w] += 1;
      topic_total[node] += 1;
      stop[node] += 1;
      std::size_t at = node;
      while (at != 0) {
        trans[at] += 1;
        pass[tree_.parent(at)] += 1;
        at = tree_.parent(at);
      }
    }
    if (stop != stop_[d] || pass != pass_[d] || trans != trans_[d]) {
      throw InternalError("document tables diverge from assignments (doc " +
                          std::to_string(d) + ")");
    }
    for (std::size_t v = 0; v < n_nodes; ++v) {
      std::int64_t out = 0;
      for (std::size_t c : tree_.children(v)) out += trans[c];
      if (out != pass[v]) {
        throw InternalError("pass count != outgoing transition sum");
      }
    }
  }
  if (topic_word != topic_word_ || topic_total != topic_total_) {
    throw InternalError("topic tables diverge from assignments");
  }
}

void GibbsState::regenerate_words(Rng& rng) {
  if (detached_) {
    throw InternalError("cannot regenerate words while one is detached");
  }
  // Strip every word from the topic tables, keeping assignments and the
  // structural counts, then redraw sequentially from the collapsed
  // predictive.
  for (std::size_t d = 0; d < words_.size(); ++d) {
    for (std::size_t n = 0; n < words_[d].size(); ++n) {
      const std::size_t node = assign_[d][n];
      topic_word_[node][words_[d][n]] -= 1;
      topic_total_[node] -= 1;
    }
  }
  for (std::size_t d = 0; d < words_.size(); ++d) {
    for (std::size_t n = 0; n < words_[d].size(); ++n) {
      const std::size_t node = assign_[d][n];
      const double total = double(topic_total_[node]) + veta_;
      double u01 = rng.next_unit() * total;
      std::uint32_t pick = static_cast<std::uint32_t>(vocab_size_ - 1);
      for (std::uint32_t w = 0; w < vocab_size_; ++w) {
        u01 -= double(topic_word_[node][w]) + config_.model.eta;
        if (u01 < 0.0) {
          pick = w;
          break;
        }
      }
      words_[d][n] = pick;
      topic_word_[node][pick] += 1;
      topic_total_[node] += 1;
    }
  }
}

std::vector<std::uint64_t> GibbsState::depth_histogram() const {
  std::vector<std::uint64_t> hist(tree_.depth() + 1, 0);
  for (std::size_t d = 0; d < words_.size(); ++d) {
    for (std::size_t n = 0; n < words_[d].size(); ++n) {
      hist[tree_.node_depth(assign_[d][n])] += 1;
    }
  }
  return hist;
}

ModelEstimate estimate_model(const GibbsState& state) {
  return estimate_model(std::vector<const GibbsState*>{&state});
}

ModelEstimate estimate_model(const std::vector<const GibbsState*>& states) {
  if (states.empty()) throw ConfigError("need at least one state");
  const GibbsState& first = *states.front();
  const CandidateTree& tree = first.candidates();
  for (const GibbsState* s : states) {
    if (s->candidates().size() != tree.size() ||
        s->doc_count() != first.doc_count()) {
      throw ConfigError("states disagree on model shape");
    }
  }
  const double scale = 1.0 / double(states.size());

  ModelEstimate model;
  model.config = first.config().model;
  model.nodes.resize(tree.size());
  for (std::size_t u = 0; u < tree.size(); ++u) {
    ModelNode& node = model.nodes[u];
    node.path = tree.path(u);
    double total = 0.0;
    for (const GibbsState* s : states) total += double(s->topic_total(u));
    node.total = total * scale;
    for (std::uint32_t w = 0; w < first.vocab_size(); ++w) {
      double c = 0.0;
      for (const GibbsState* s : states) {
        c += double(s->topic_word_count(u, w));
      }
      if (c > 0.0) node.word_counts.emplace_back(w, c * scale);
    }
    node.child_usage.reserve(tree.children(u).size());
    for (std::size_t c : tree.children(u)) {
      double usage = 0.0;
      for (const GibbsState* s : states) {
        for (std::size_t d = 0; d < s->doc_count(); ++d) {
          usage += double(s->transition_count(d, c));
        }
      }
      node.child_usage.push_back(usage * scale);
    }
  }

  model.doc_weights.resize(first.doc_count());
  for (std::size_t d = 0; d < first.doc_count(); ++d) {
    std::vector<double> counts(tree.size(), 0.0);
    double total = 0.0;
    for (const GibbsState* s : states) {
      for (std::size_t u = 0; u < tree.size(); ++u) {
        counts[u] += double(s->stop_count(d, u));
        total += double(s->stop_count(d, u));
      }
    }
    for (std::size_t u = 0; u < tree.size(); ++u) {
      if (counts[u] > 0.0) {
        model.doc_weights[d].emplace_back(u, counts[u] / total);
      }
    }
  }

  model.depth_histogram.assign(tree.depth() + 1, 0);
  for (const GibbsState* s : states) {
    const auto hist = s->depth_histogram();
    for (std::size_t i = 0; i < hist.size(); ++i) {
      model.depth_histogram[i] += hist[i];
    }
  }
  return model;
}

PerplexityReport heldout_perplexity(const ModelEstimate& model,
                                    const Corpus& heldout,
                                    const EvalOptions& options, Rng& rng) {
  model.validate();
  options.validate();
  heldout.validate();
  if (heldout.vocab_size() != model.config.vocab_size) {
    throw ConfigError("held-out corpus vocabulary does not match the model");
  }
  const ModelConfig& m = model.config;
  const CandidateTree tree(m.depth, m.child_caps);
  if (tree.size() != model.nodes.size()) {
    throw ConfigError("model node list does not match its truncation");
  }
  const std::size_t n_nodes = tree.size();

  // Frozen transition smoothing from the model's aggregate usage.
  std::vector<double> cb(n_nodes, 0.0);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    const auto& kids = tree.children(v);
    if (kids.empty()) continue;
    const auto& usage = model.nodes[v].child_usage;
    if (usage.size() != kids.size()) {
      throw ConfigError("model child usage does not match its truncation");
    }
    double out = 0.0;
    for (double u : usage) out += u;
    const double spread = m.alpha / double(kids.size());
    for (std::size_t i = 0; i < kids.size(); ++i) {
      cb[kids[i]] = m.doc_concentration * (usage[i] + spread) / (out + m.alpha);
    }
  }

  const std::vector<double> unigram = model.unigram_distribution();
  const double sw_a = m.switch_prior.a;
  const double sw_b = m.switch_prior.b;

  PerplexityReport report;
  double log_pred = 0.0;
  double log_uni = 0.0;

  std::vector<std::int32_t> stop(n_nodes), pass(n_nodes), trans(n_nodes);
  std::vector<double> reach(n_nodes), ppath(n_nodes), score(n_nodes);

  for (std::size_t d = 0; d < heldout.doc_count(); ++d) {
    const auto& tokens = heldout.docs[d];
    const std::size_t fit_len =
        static_cast<std::size_t>(double(tokens.size()) * options.heldout_split);
    const std::size_t eval_len = tokens.size() - fit_len;
    if (eval_len == 0) {
      std::cerr << "warning: held-out document " << d
                << " has no evaluation half; skipped\n";
      ++report.docs_skipped;
      continue;
    }

    // Log topic predictives for this document's distinct words, frozen.
    std::map<std::uint32_t, std::vector<double>> log_phi;
    std::map<std::uint32_t, std::vector<double>> phi;
    for (std::uint32_t w : tokens) {
      if (phi.count(w)) continue;
      std::vector<double> col(n_nodes), lcol(n_nodes);
      for (std::size_t u = 0; u < n_nodes; ++u) {
        col[u] = model.topic_probability(u, w);
        lcol[u] = std::log(col[u]);
      }
      phi.emplace(w, std::move(col));
      log_phi.emplace(w, std::move(lcol));
    }

    std::fill(stop.begin(), stop.end(), 0);
    std::fill(pass.begin(), pass.end(), 0);
    std::fill(trans.begin(), trans.end(), 0);
    std::vector<std::size_t> fit_assign(fit_len, 0);

    auto attach_at = [&](std::size_t pos, std::size_t node) {
      fit_assign[pos] = node;
      stop[node] += 1;
      std::size_t at = node;
      while (at != 0) {
        trans[at] += 1;
        pass[tree.parent(at)] += 1;
        at = tree.parent(at);
      }
    };
    auto detach_at = [&](std::size_t pos) {
      const std::size_t node = fit_assign[pos];
      stop[node] -= 1;
      std::size_t at = node;
      while (at != 0) {
        trans[at] -= 1;
        pass[tree.parent(at)] -= 1;
        at = tree.parent(at);
      }
    };

    // Structural prior walk for the initial fit assignments.
    for (std::size_t n = 0; n < fit_len; ++n) {
      std::size_t at = 0;
      for (;;) {
        if (tree.node_depth(at) >= m.depth) break;
        const double s = double(stop[at]);
        const double p = double(pass[at]);
        const double stop_prob = (sw_a + s) / (sw_a + sw_b + s + p);
        if (rng.next_unit() < stop_prob) break;
        const auto& kids = tree.children(at);
        double total = 0.0;
        for (std::size_t c : kids) total += double(trans[c]) + cb[c];
        double u01 = rng.next_unit() * total;
        std::size_t pick = kids.back();
        for (std::size_t c : kids) {
          u01 -= double(trans[c]) + cb[c];
          if (u01 < 0.0) {
            pick = c;
            break;
          }
        }
        at = pick;
      }
      attach_at(n, at);
    }

    // Per-token predictive accumulators over post-burn-in sweeps.
    std::vector<double> pred(eval_len, 0.0);
    std::size_t pred_rounds = 0;

    for (std::size_t sweep = 0; sweep < options.fit_sweeps; ++sweep) {
      for (std::size_t n = 0; n < fit_len; ++n) {
        detach_at(n);
        const auto& lphi = log_phi.at(tokens[n]);
        // walk[u] (stored in reach) is the log continue+transition prefix of
        // the root-to-u path; the stop predictive and the frozen topic term
        // complete the score.
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t u = 0; u < n_nodes; ++u) {
          if (u == 0) {
            reach[0] = 0.0;
          } else {
            const std::size_t v = tree.parent(u);
            const double denom =
                sw_a + sw_b + double(stop[v]) + double(pass[v]);
            reach[u] = reach[v] + std::log(sw_b + double(pass[v])) -
                       std::log(denom) + std::log(double(trans[u]) + cb[u]) -
                       std::log(double(pass[v]) + m.doc_concentration);
          }
          double sc = reach[u] + lphi[u];
          if (tree.node_depth(u) < m.depth) {
            sc += std::log(sw_a + double(stop[u])) -
                  std::log(sw_a + sw_b + double(stop[u]) + double(pass[u]));
          }
          score[u] = sc;
          best = std::max(best, sc);
        }
        double total = 0.0;
        for (std::size_t u = 0; u < n_nodes; ++u) {
          score[u] = std::exp(score[u] - best);
          total += score[u];
        }
        double u01 = rng.next_unit() * total;
        std::size_t pick = n_nodes - 1;
        for (std::size_t u = 0; u < n_nodes; ++u) {
          u01 -= score[u];
          if (u01 < 0.0) {
            pick = u;
            break;
          }
        }
        attach_at(n, pick);
      }

      if (sweep < options.fit_burn_in) continue;
      ++pred_rounds;
      // Structural predictive of a fresh word, telescoping down the tree.
      reach[0] = 1.0;
      for (std::size_t u = 0; u < n_nodes; ++u) {
        if (u != 0) {
          const std::size_t v = tree.parent(u);
          const double denom = sw_a + sw_b + double(stop[v]) + double(pass[v]);
          const double cont = (sw_b + double(pass[v])) / denom;
          const double t = (double(trans[u]) + cb[u]) /
                           (double(pass[v]) + m.doc_concentration);
          reach[u] = reach[v] * cont * t;
        }
        if (tree.node_depth(u) < m.depth) {
          const double denom = sw_a + sw_b + double(stop[u]) + double(pass[u]);
          ppath[u] = reach[u] * (sw_a + double(stop[u])) / denom;
        } else {
          ppath[u] = reach[u];
        }
      }
      for (std::size_t e = 0; e < eval_len; ++e) {
        const auto& col = phi.at(tokens[fit_len + e]);
        double p = 0.0;
        for (std::size_t u = 0; u < n_nodes; ++u) p += ppath[u] * col[u];
        pred[e] += p;
      }
    }

    ++report.docs_used;
    for (std::size_t e = 0; e < eval_len; ++e) {
      log_pred += std::log(pred[e] / double(pred_rounds));
      log_uni += std::log(unigram[tokens[fit_len + e]]);
      ++report.eval_tokens;
    }
  }

  if (report.eval_tokens == 0) {
    throw ConfigError("no evaluable held-out tokens");
  }
  report.nhdp = std::exp(-log_pred / double(report.eval_tokens));
  report.unigram = std::exp(-log_uni / double(report.eval_tokens));
  return report;
}

}  // namespace nhdp
