#pragma once

#include "nhdp/corpus.hpp"
#include "nhdp/tree.hpp"

namespace nhdp {

// True when the document's distinct generating nodes are totally ordered by
// ancestry (every pair is comparable under the prefix relation). Single-path
// generation always satisfies this; per-word walks generally do not.
bool chain_property(const std::vector<NodePath>& assignments);

// True when the union of the assignment paths and all their prefixes is a
// prefix-closed set containing the root, i.e. a connected subtree.
bool subtree_property(const std::vector<NodePath>& assignments);

struct StructureReport {
  std::size_t docs = 0;
  std::size_t chain_pass = 0;
  std::size_t subtree_pass = 0;

  bool all_chain() const { return chain_pass == docs; }
  bool all_subtree() const { return subtree_pass == docs; }
};

StructureReport check_structure(const DocumentAssignments& assignments);

}  // namespace nhdp
