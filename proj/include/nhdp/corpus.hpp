#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nhdp/tree.hpp"

namespace nhdp {

// Bag-of-words documents over a fixed vocabulary, with tokens expanded in
// deterministic order (ascending word id, repeated by count).
struct Corpus {
  std::vector<std::string> vocab;
  std::vector<std::vector<std::uint32_t>> docs;

  std::size_t vocab_size() const { return vocab.size(); }
  std::size_t doc_count() const { return docs.size(); }
  std::size_t total_tokens() const;

  void validate() const;  // throws ConfigError on out-of-range tokens
};

// Synthetic vocabulary w0..w{V-1}.
std::vector<std::string> synthetic_vocab(std::size_t vocab_size);

// UCI bag-of-words layout: three header lines (D, W, NNZ), then NNZ lines of
// `docID wordID count` with 1-based ids. The vocabulary file holds one token
// per line, exactly W of them.
Corpus load_bow(const std::string& bow_path, const std::string& vocab_path);

// Canonical serialization: entries doc-major, ascending word id, aggregated
// counts. load_bow(save_corpus(c)) reproduces c and re-saving is
// byte-identical.
void save_corpus(const Corpus& corpus, const std::string& bow_path,
                 const std::string& vocab_path);

Corpus load_corpus(const std::string& bow_path, const std::string& vocab_path);

// Per-document, per-word generating node.
using DocumentAssignments = std::vector<std::vector<NodePath>>;

void save_ground_truth(const DocumentAssignments& assignments,
                       const std::string& path);
DocumentAssignments load_ground_truth(const std::string& path);

struct GeneratedCorpus {
  Corpus corpus;
  DocumentAssignments assignments;
};

}  // namespace nhdp
