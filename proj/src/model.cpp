#include "nhdp/model.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace nhdp {

namespace {

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << bytes;
  if (!out) throw ConfigError("write failed for " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct ExportRow {
  NodePath path;
  double total = 0.0;
  std::vector<std::pair<std::uint32_t, double>> top_words;  // (word, prob)
};

std::vector<std::pair<std::uint32_t, double>> top_of(
    const std::vector<double>& topic, std::size_t top_n) {
  std::vector<std::pair<std::uint32_t, double>> entries;
  entries.reserve(topic.size());
  for (std::size_t w = 0; w < topic.size(); ++w) {
    entries.emplace_back(static_cast<std::uint32_t>(w), topic[w]);
  }
  // Highest probability first; ties resolved by word index for determinism.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  entries.resize(std::min(top_n, entries.size()));
  return entries;
}

std::string token_label(const std::vector<std::string>& vocab,
                        std::uint32_t word) {
  if (word < vocab.size()) return vocab[word];
  return "w" + std::to_string(word);
}

std::string json_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

// Hand-rolled writer: keys emitted in sorted order, floats pinned to six
// decimals, so identical inputs give identical bytes.
void write_rows_json(const std::vector<ExportRow>& rows,
                     const std::vector<std::string>& vocab,
                     const std::string& path) {
  std::ostringstream out;
  out << "{\n  \"nodes\": [\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const ExportRow& row = rows[i];
    out << "    {\"count\": " << fixed6(row.total) << ", \"path\": [";
    for (std::size_t j = 0; j < row.path.indices.size(); ++j) {
      if (j > 0) out << ", ";
      out << row.path.indices[j];
    }
    out << "], \"words\": [";
    for (std::size_t j = 0; j < row.top_words.size(); ++j) {
      if (j > 0) out << ", ";
      out << "{\"p\": " << fixed6(row.top_words[j].second) << ", \"token\": \""
          << json_escape(token_label(vocab, row.top_words[j].first)) << "\"}";
    }
    out << "]}";
    if (i + 1 < rows.size()) out << ",";
    out << "\n";
  }
  out << "  ],\n  \"version\": 1\n}\n";
  write_file(path, out.str());
}

std::string dot_node_id(const NodePath& path) {
  std::string id = "n";
  for (std::uint32_t i : path.indices) id += "_" + std::to_string(i);
  return id;
}

void write_rows_dot(const std::vector<ExportRow>& rows,
                    const std::vector<std::string>& vocab,
                    const std::string& path) {
  std::ostringstream out;
  out << "digraph topics {\n  node [shape=box, fontsize=10];\n";
  for (const ExportRow& row : rows) {
    out << "  " << dot_node_id(row.path) << " [label=\"";
    for (std::size_t j = 0; j < row.top_words.size(); ++j) {
      if (j > 0) out << "\\n";
      out << json_escape(token_label(vocab, row.top_words[j].first));
    }
    out << "\"";
    if (row.path.depth() <= 1) out << ", style=filled, fillcolor=gray85";
    out << "];\n";
  }
  // Parent/child edges implied by path prefixes.
  std::set<NodePath> present;
  for (const ExportRow& row : rows) present.insert(row.path);
  for (const ExportRow& row : rows) {
    if (row.path.is_root()) continue;
    const NodePath parent = row.path.parent();
    if (present.count(parent)) {
      out << "  " << dot_node_id(parent) << " -> " << dot_node_id(row.path)
          << ";\n";
    }
  }
  out << "}\n";
  write_file(path, out.str());
}

std::vector<ExportRow> rows_from_model(const ModelEstimate& model,
                                       std::size_t top_n, bool active_only) {
  std::vector<ExportRow> rows;
  for (std::size_t i = 0; i < model.nodes.size(); ++i) {
    if (active_only && model.dormant(i)) continue;
    ExportRow row;
    row.path = model.nodes[i].path;
    row.total = model.nodes[i].total;
    row.top_words = top_of(model.topic(i), top_n);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ExportRow> rows_from_tree(const GlobalTree& tree,
                                      std::size_t top_n) {
  std::vector<ExportRow> rows;
  for (const auto& [path, node] : tree.nodes()) {
    ExportRow row;
    row.path = path;
    if (path.is_root()) {
      double total = 0.0;
      for (auto c : node.child_counts) total += double(c);
      row.total = total;
    } else {
      row.total =
          double(tree.node(path.parent()).child_counts[path.indices.back()]);
    }
    row.top_words = top_of(node.topic.weights(), top_n);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

void ModelConfig::validate() const {
  if (vocab_size < 2) throw ConfigError("vocab size must be >= 2");
  if (depth < 1) throw ConfigError("depth must be >= 1");
  if (child_caps.size() != depth) {
    throw ConfigError("need one child cap per level");
  }
  for (std::size_t cap : child_caps) {
    if (cap < 1) throw ConfigError("child caps must be >= 1");
  }
  if (!(alpha > 0.0)) throw ConfigError("alpha must be positive");
  if (!(eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(doc_concentration > 0.0)) {
    throw ConfigError("document concentration must be positive");
  }
  switch_prior.validate();
}

double ModelNode::word_count(std::uint32_t word) const {
  auto it = std::lower_bound(
      word_counts.begin(), word_counts.end(), word,
      [](const auto& entry, std::uint32_t w) { return entry.first < w; });
  if (it != word_counts.end() && it->first == word) return it->second;
  return 0.0;
}

double ModelEstimate::topic_probability(std::size_t node,
                                        std::uint32_t word) const {
  const ModelNode& n = nodes.at(node);
  const double veta = double(config.vocab_size) * config.eta;
  return (n.word_count(word) + config.eta) / (n.total + veta);
}

std::vector<double> ModelEstimate::topic(std::size_t node) const {
  const ModelNode& n = nodes.at(node);
  const double veta = double(config.vocab_size) * config.eta;
  std::vector<double> out(config.vocab_size, config.eta / (n.total + veta));
  for (const auto& [word, count] : n.word_counts) {
    out[word] = (count + config.eta) / (n.total + veta);
  }
  return out;
}

std::size_t ModelEstimate::active_node_count() const {
  std::size_t active = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!dormant(i)) ++active;
  }
  return active;
}

std::vector<double> ModelEstimate::unigram_distribution() const {
  std::vector<double> counts(config.vocab_size, 0.0);
  double total = 0.0;
  for (const ModelNode& n : nodes) {
    for (const auto& [word, count] : n.word_counts) {
      counts[word] += count;
      total += count;
    }
  }
  const double veta = double(config.vocab_size) * config.eta;
  for (double& c : counts) c = (c + config.eta) / (total + veta);
  return counts;
}

void ModelEstimate::validate() const {
  config.validate();
  for (const ModelNode& n : nodes) {
    if (n.path.depth() > config.depth) {
      throw ConfigError("model node deeper than configured depth");
    }
    for (const auto& [word, count] : n.word_counts) {
      if (word >= config.vocab_size) {
        throw ConfigError("model word index outside vocabulary");
      }
      if (!(count >= 0.0)) throw ConfigError("negative model count");
    }
  }
}

void save_model(const ModelEstimate& model, const std::string& path) {
  nlohmann::json j;
  j["version"] = 1;
  j["type"] = "nhdp-model";
  nlohmann::json cfg;
  cfg["vocab_size"] = model.config.vocab_size;
  cfg["depth"] = model.config.depth;
  cfg["child_caps"] = model.config.child_caps;
  cfg["alpha"] = model.config.alpha;
  cfg["eta"] = model.config.eta;
  cfg["doc_concentration"] = model.config.doc_concentration;
  cfg["switch_a"] = model.config.switch_prior.a;
  cfg["switch_b"] = model.config.switch_prior.b;
  j["config"] = std::move(cfg);

  nlohmann::json nodes = nlohmann::json::array();
  for (const ModelNode& n : model.nodes) {
    nlohmann::json node;
    node["path"] = n.path.indices;
    node["total"] = n.total;
    nlohmann::json words = nlohmann::json::array();
    for (const auto& [word, count] : n.word_counts) {
      words.push_back({word, count});
    }
    node["words"] = std::move(words);
    node["child_usage"] = n.child_usage;
    nodes.push_back(std::move(node));
  }
  j["nodes"] = std::move(nodes);

  nlohmann::json docs = nlohmann::json::array();
  for (const auto& weights : model.doc_weights) {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& [node, weight] : weights) {
      doc.push_back({node, weight});
    }
    docs.push_back(std::move(doc));
  }
  j["doc_weights"] = std::move(docs);
  j["depth_histogram"] = model.depth_histogram;

  write_file(path, j.dump(2) + "\n");
}

ModelEstimate load_model(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  try {
    if (!j.contains("version") || j["version"].get<int>() != 1) {
      throw ParseError(path + ": unsupported model version");
    }
    if (j.value("type", "") != "nhdp-model") {
      throw ParseError(path + ": not a model file");
    }
    ModelEstimate model;
    const auto& cfg = j.at("config");
    model.config.vocab_size = cfg.at("vocab_size").get<std::size_t>();
    model.config.depth = cfg.at("depth").get<std::size_t>();
    model.config.child_caps =
        cfg.at("child_caps").get<std::vector<std::size_t>>();
    model.config.alpha = cfg.at("alpha").get<double>();
    model.config.eta = cfg.at("eta").get<double>();
    model.config.doc_concentration =
        cfg.at("doc_concentration").get<double>();
    model.config.switch_prior.a = cfg.at("switch_a").get<double>();
    model.config.switch_prior.b = cfg.at("switch_b").get<double>();

    for (const auto& node : j.at("nodes")) {
      ModelNode n;
      n.path.indices = node.at("path").get<std::vector<std::uint32_t>>();
      n.total = node.at("total").get<double>();
      for (const auto& entry : node.at("words")) {
        n.word_counts.emplace_back(entry.at(0).get<std::uint32_t>(),
                                   entry.at(1).get<double>());
      }
      n.child_usage = node.at("child_usage").get<std::vector<double>>();
      model.nodes.push_back(std::move(n));
    }
    for (const auto& doc : j.at("doc_weights")) {
      std::vector<std::pair<std::size_t, double>> weights;
      for (const auto& entry : doc) {
        weights.emplace_back(entry.at(0).get<std::size_t>(),
                             entry.at(1).get<double>());
      }
      model.doc_weights.push_back(std::move(weights));
    }
    model.depth_histogram =
        j.at("depth_histogram").get<std::vector<std::uint64_t>>();
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void export_tree_json(const ModelEstimate& model,
                      const std::vector<std::string>& vocab,
                      const std::string& path, std::size_t top_n,
                      bool active_only) {
  write_rows_json(rows_from_model(model, top_n, active_only), vocab, path);
}

void export_tree_json(const GlobalTree& tree,
                      const std::vector<std::string>& vocab,
                      const std::string& path, std::size_t top_n) {
  write_rows_json(rows_from_tree(tree, top_n), vocab, path);
}

void export_tree_dot(const ModelEstimate& model,
                     const std::vector<std::string>& vocab,
                     const std::string& path, std::size_t top_k) {
  write_rows_dot(rows_from_model(model, top_k, /*active_only=*/true), vocab,
                 path);
}

void export_tree_dot(const GlobalTree& tree,
                     const std::vector<std::string>& vocab,
                     const std::string& path, std::size_t top_k) {
  write_rows_dot(rows_from_tree(tree, top_k), vocab, path);
}

}  // namespace nhdp
