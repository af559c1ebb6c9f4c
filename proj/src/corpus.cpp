#include "nhdp/corpus.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace nhdp {

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path);
  out << bytes;
  if (!out) throw ConfigError("write failed for " + path);
}

// Strict line-oriented unsigned integer parsing; rejects trailing junk.
std::vector<std::uint64_t> parse_uints(const std::string& line,
                                       std::size_t want, std::size_t line_no) {
  std::istringstream iss(line);
  std::vector<std::uint64_t> out;
  std::int64_t v = 0;
  while (iss >> v) {
    if (v < 0) throw ParseError("negative value", line_no);
    out.push_back(static_cast<std::uint64_t>(v));
  }
  if (!iss.eof()) throw ParseError("malformed integer field", line_no);
  if (out.size() != want) {
    throw ParseError("expected " + std::to_string(want) + " fields, got " +
                         std::to_string(out.size()),
                     line_no);
  }
  return out;
}

}  // namespace

std::size_t Corpus::total_tokens() const {
  std::size_t n = 0;
  for (const auto& d : docs) n += d.size();
  return n;
}

void Corpus::validate() const {
  for (std::size_t d = 0; d < docs.size(); ++d) {
    for (std::uint32_t w : docs[d]) {
      if (w >= vocab.size()) {
        throw ConfigError("document " + std::to_string(d) +
                          " holds word index " + std::to_string(w) +
                          " outside vocabulary of size " +
                          std::to_string(vocab.size()));
      }
    }
  }
}

std::vector<std::string> synthetic_vocab(std::size_t vocab_size) {
  std::vector<std::string> vocab;
  vocab.reserve(vocab_size);
  for (std::size_t i = 0; i < vocab_size; ++i) {
    vocab.push_back("w" + std::to_string(i));
  }
  return vocab;
}

Corpus load_bow(const std::string& bow_path, const std::string& vocab_path) {
  std::ifstream in(bow_path);
  if (!in) throw ConfigError("cannot open " + bow_path);

  std::string line;
  std::uint64_t header[3] = {0, 0, 0};
  for (int i = 0; i < 3; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("missing header line", static_cast<std::size_t>(i + 1));
    }
    header[i] = parse_uints(line, 1, static_cast<std::size_t>(i + 1))[0];
  }
  const std::uint64_t n_docs = header[0];
  const std::uint64_t n_words = header[1];
  const std::uint64_t nnz = header[2];

  // Per document: word id -> count, ordered so expansion is canonical.
  std::vector<std::map<std::uint32_t, std::uint64_t>> counts(n_docs);
  std::size_t line_no = 3;
  for (std::uint64_t i = 0; i < nnz; ++i) {
    ++line_no;
    if (!std::getline(in, line)) {
      throw ParseError("file truncated: expected " + std::to_string(nnz) +
                           " entries",
                       line_no);
    }
    const auto fields = parse_uints(line, 3, line_no);
    const std::uint64_t doc_id = fields[0];
    const std::uint64_t word_id = fields[1];
    const std::uint64_t count = fields[2];
    if (doc_id < 1 || doc_id > n_docs) {
      throw ParseError("doc id " + std::to_string(doc_id) + " out of 1.." +
                           std::to_string(n_docs),
                       line_no);
    }
    if (word_id < 1 || word_id > n_words) {
      throw ParseError("word id " + std::to_string(word_id) + " out of 1.." +
                           std::to_string(n_words),
                       line_no);
    }
    if (count < 1) throw ParseError("count must be >= 1", line_no);
    auto [it, inserted] = counts[doc_id - 1].emplace(
        static_cast<std::uint32_t>(word_id - 1), count);
    if (!inserted) {
      throw ParseError("duplicate (doc, word) entry", line_no);
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty()) {
      throw ParseError("trailing content after " + std::to_string(nnz) +
                           " entries",
                       line_no);
    }
  }

  Corpus corpus;
  corpus.docs.resize(n_docs);
  for (std::uint64_t d = 0; d < n_docs; ++d) {
    for (const auto& [word, count] : counts[d]) {
      for (std::uint64_t k = 0; k < count; ++k) {
        corpus.docs[d].push_back(word);
      }
    }
  }

  std::ifstream vin(vocab_path);
  if (!vin) throw ConfigError("cannot open " + vocab_path);
  std::string token;
  while (std::getline(vin, token)) {
    corpus.vocab.push_back(token);
  }
  if (corpus.vocab.size() != n_words) {
    throw ConfigError("vocabulary file " + vocab_path + " has " +
                      std::to_string(corpus.vocab.size()) +
                      " tokens, bag-of-words header says " +
                      std::to_string(n_words));
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::string& bow_path,
                 const std::string& vocab_path) {
  corpus.validate();
  std::vector<std::map<std::uint32_t, std::uint64_t>> counts(
      corpus.doc_count());
  std::size_t nnz = 0;
  for (std::size_t d = 0; d < corpus.doc_count(); ++d) {
    for (std::uint32_t w : corpus.docs[d]) counts[d][w] += 1;
    nnz += counts[d].size();
  }

  std::ostringstream bow;
  bow << corpus.doc_count() << "\n"
      << corpus.vocab_size() << "\n"
      << nnz << "\n";
  for (std::size_t d = 0; d < corpus.doc_count(); ++d) {
    for (const auto& [word, count] : counts[d]) {
      bow << (d + 1) << " " << (word + 1) << " " << count << "\n";
    }
  }
  write_file(bow_path, bow.str());

  std::ostringstream voc;
  for (const auto& token : corpus.vocab) voc << token << "\n";
  write_file(vocab_path, voc.str());
}

Corpus load_corpus(const std::string& bow_path,
                   const std::string& vocab_path) {
  return load_bow(bow_path, vocab_path);
}

void save_ground_truth(const DocumentAssignments& assignments,
                       const std::string& path) {
  nlohmann::json docs = nlohmann::json::array();
  for (const auto& doc : assignments) {
    nlohmann::json words = nlohmann::json::array();
    for (const auto& p : doc) {
      words.push_back(p.indices);
    }
    docs.push_back(std::move(words));
  }
  nlohmann::json root;
  root["docs"] = std::move(docs);
  root["type"] = "nhdp-ground-truth";
  root["version"] = 1;
  write_file(path, root.dump(2) + "\n");
}

DocumentAssignments load_ground_truth(const std::string& path) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!root.is_object() || !root.contains("version") ||
      !root["version"].is_number_integer()) {
    throw ParseError(path + ": missing version");
  }
  if (root["version"].get<int>() != 1) {
    throw ParseError(path + ": unsupported version " +
                     root["version"].dump());
  }
  if (root.value("type", "") != "nhdp-ground-truth") {
    throw ParseError(path + ": not a ground-truth file");
  }
  DocumentAssignments out;
  for (const auto& doc : root.at("docs")) {
    std::vector<NodePath> words;
    for (const auto& p : doc) {
      NodePath node;
      for (const auto& idx : p) {
        if (!idx.is_number_unsigned()) {
          throw ParseError(path + ": node path entries must be non-negative");
        }
        node.indices.push_back(idx.get<std::uint32_t>());
      }
      words.push_back(std::move(node));
    }
    out.push_back(std::move(words));
  }
  return out;
}

}  // namespace nhdp
