#include "nhdp/checks.hpp"

#include <algorithm>
#include <set>

namespace nhdp {

bool chain_property(const std::vector<NodePath>& assignments) {
  std::set<NodePath> distinct(assignments.begin(), assignments.end());
  // Comparable paths sorted lexicographically are nested front to back, so
  // the chain property reduces to consecutive prefix checks.
  std::vector<NodePath> sorted(distinct.begin(), distinct.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const NodePath& a, const NodePath& b) {
              return a.depth() < b.depth() || (a.depth() == b.depth() && a < b);
            });
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (!sorted[i - 1].is_prefix_of(sorted[i])) return false;
  }
  return true;
}

bool subtree_property(const std::vector<NodePath>& assignments) {
  std::set<NodePath> closure;
  closure.insert(NodePath{});
  for (const auto& p : assignments) {
    for (std::size_t len = 0; len <= p.depth(); ++len) {
      closure.insert(p.prefix(len));
    }
  }
  for (const auto& p : closure) {
    if (!p.is_root() && closure.find(p.parent()) == closure.end()) {
      return false;
    }
  }
  return true;
}

StructureReport check_structure(const DocumentAssignments& assignments) {
  StructureReport report;
  report.docs = assignments.size();
  for (const auto& doc : assignments) {
    if (chain_property(doc)) ++report.chain_pass;
    if (subtree_property(doc)) ++report.subtree_pass;
  }
  return report;
}

}  // namespace nhdp
