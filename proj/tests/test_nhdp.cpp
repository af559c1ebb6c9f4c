#include <doctest.h>

#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "nhdp/checks.hpp"
#include "nhdp/nhdp.hpp"

using nhdp::DiscreteMeasure;
using nhdp::DocumentTree;
using nhdp::GlobalTree;
using nhdp::NodePath;
using nhdp::Rng;
using nhdp::Simplex;
using nhdp::SwitchPrior;

namespace {

// A fully instantiated tree so walks never grow it.
GlobalTree saturated_tree(std::uint64_t seed, std::size_t vocab,
                          std::size_t depth, std::size_t branching) {
  Rng rng(seed);
  GlobalTree tree(vocab, depth,
                  std::vector<std::size_t>(depth, branching), 5.0, 0.5, rng);
  std::vector<NodePath> frontier{NodePath{}};
  for (std::size_t level = 0; level < depth; ++level) {
    std::vector<NodePath> next;
    for (const NodePath& p : frontier) {
      for (std::size_t c = 0; c < branching; ++c) {
        next.push_back(tree.instantiate_child(p, rng));
      }
    }
    frontier = std::move(next);
  }
  return tree;
}

}  // namespace

TEST_CASE("switch at max depth is forced to one") {
  GlobalTree tree = saturated_tree(1, 5, 2, 2);
  Rng rng(2);
  DocumentTree doc(tree, 1.0, SwitchPrior{1.0, 2.0});
  const NodePath leaf(std::vector<std::uint32_t>{0, 1});
  CHECK(doc.switch_probability(leaf, rng) == 1.0);
}

TEST_CASE("huge concentration keeps transitions near the base") {
  GlobalTree tree = saturated_tree(3, 5, 1, 3);
  tree.record_child_selection(NodePath{}, 0);  // counts (2, 1, 1)
  Rng rng(4);
  const Simplex base = tree.crp_child_probabilities(NodePath{});
  DocumentTree doc(tree, 1e6, SwitchPrior{});
  const DiscreteMeasure t = doc.transition(NodePath{}, rng);
  REQUIRE(t.size() == base.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    tv += std::abs(t.weights[i] - base[i]);
  }
  CHECK(tv / 2 < 0.01);
}

TEST_CASE("documents share supports but not weights") {
  GlobalTree tree = saturated_tree(5, 5, 1, 4);
  Rng rng(6);
  DocumentTree doc_a(tree, 1.0, SwitchPrior{}, 0);
  DocumentTree doc_b(tree, 1.0, SwitchPrior{}, 1);
  const DiscreteMeasure ta = doc_a.transition(NodePath{}, rng);
  const DiscreteMeasure tb = doc_b.transition(NodePath{}, rng);
  CHECK(ta.atoms == tb.atoms);
  double tv = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    tv += std::abs(ta.weights[i] - tb.weights[i]);
  }
  CHECK(tv > 0.0);
}

TEST_CASE("stopping at the root pins every word to the root") {
  GlobalTree tree = saturated_tree(7, 5, 2, 2);
  Rng rng(8);
  DocumentTree doc(tree, 1.0, SwitchPrior{});
  doc.force_constant_switch(1.0);
  for (int i = 0; i < 50; ++i) {
    CHECK(nhdp::sample_word_path(doc, rng) == NodePath{});
  }
}

TEST_CASE("never stopping forces full-depth walks") {
  GlobalTree tree = saturated_tree(9, 5, 3, 2);
  Rng rng(10);
  DocumentTree doc(tree, 1.0, SwitchPrior{});
  doc.force_constant_switch(0.0);
  for (int i = 0; i < 50; ++i) {
    CHECK(nhdp::sample_word_path(doc, rng).depth() == 3);
  }
}

TEST_CASE("constant switch gives the truncated geometric depth law") {
  for (double p : {0.3, 0.5, 0.7}) {
    GlobalTree tree = saturated_tree(11, 5, 3, 2);
    Rng rng(12);
    DocumentTree doc(tree, 1.0, SwitchPrior{});
    doc.force_constant_switch(p);
    const int n = 100000;
    double freq[4] = {0, 0, 0, 0};
    for (int i = 0; i < n; ++i) {
      freq[nhdp::sample_word_path(doc, rng).depth()] += 1.0;
    }
    const double expected[4] = {p, (1 - p) * p, (1 - p) * (1 - p) * p,
                                (1 - p) * (1 - p) * (1 - p)};
    double tv = 0.0;
    for (int d = 0; d < 4; ++d) tv += std::abs(freq[d] / n - expected[d]);
    CHECK(tv / 2 < 0.01);
  }
}

TEST_CASE("walks terminate within max depth") {
  GlobalTree tree = saturated_tree(13, 5, 3, 2);
  Rng rng(14);
  DocumentTree doc(tree, 0.3, SwitchPrior{0.5, 0.5});
  for (int i = 0; i < 2000; ++i) {
    CHECK(nhdp::sample_word_path(doc, rng).depth() <= 3);
  }
}

TEST_CASE("empty document generates nothing") {
  GlobalTree tree = saturated_tree(15, 5, 2, 2);
  Rng rng(16);
  DocumentTree doc(tree, 1.0, SwitchPrior{});
  const nhdp::NhdpDocument d = nhdp::generate_nhdp_document(tree, doc, 0, rng);
  CHECK(d.words.empty());
  CHECK(d.assignments.empty());
}

TEST_CASE("chained point masses pin words and assignments") {
  GlobalTree tree = saturated_tree(17, 10, 2, 2);
  std::vector<double> point(10, 0.0);
  point[7] = 1.0;
  tree.set_topic(NodePath{}, Simplex(point));
  Rng rng(18);
  DocumentTree doc(tree, 1.0, SwitchPrior{});
  doc.force_constant_switch(1.0);
  const nhdp::NhdpDocument d = nhdp::generate_nhdp_document(tree, doc, 40, rng);
  for (std::size_t i = 0; i < d.words.size(); ++i) {
    CHECK(d.words[i] == 7);
    CHECK(d.assignments[i] == NodePath{});
  }
}

TEST_CASE("branch word frequencies match the document's own weights") {
  // Two branches with disjoint topic supports; every word continues past
  // the root, so branch identity is read off the word.
  GlobalTree tree = saturated_tree(19, 4, 1, 2);
  tree.set_topic(NodePath(std::vector<std::uint32_t>{0}),
                 Simplex(std::vector<double>{0.5, 0.5, 0.0, 0.0}));
  tree.set_topic(NodePath(std::vector<std::uint32_t>{1}),
                 Simplex(std::vector<double>{0.0, 0.0, 0.5, 0.5}));
  Rng rng(20);
  DocumentTree doc(tree, 1.0, SwitchPrior{});
  doc.force_constant_switch(0.0);
  const DiscreteMeasure t = doc.transition(NodePath{}, rng);

  const int n = 100000;
  const nhdp::NhdpDocument d = nhdp::generate_nhdp_document(tree, doc, n, rng);
  double branch0 = 0.0;
  for (std::uint32_t w : d.words) branch0 += w < 2;
  // Weight of the resolved atom for child 0 within the walked measure.
  double w0 = 0.0, total = 0.0;
  const DiscreteMeasure walked = doc.transition(NodePath{}, rng);
  for (std::size_t i = 0; i < walked.size(); ++i) {
    if (walked.atoms[i] == 0) w0 = walked.weights[i];
    total += walked.weights[i];
  }
  CHECK(std::abs(branch0 / n - w0 / total) < 0.02);
}

TEST_CASE("corpus generation is reproducible and single-doc consistent") {
  auto build = [](std::uint64_t seed) {
    Rng rng(seed);
    GlobalTree tree(8, 2, {3, 2}, 2.0, 0.2, rng);
    nhdp::NhdpPriors priors;
    return nhdp::generate_nhdp_corpus(tree, 20, 30, priors, rng);
  };
  const nhdp::GeneratedCorpus a = build(99);
  const nhdp::GeneratedCorpus b = build(99);
  CHECK(a.corpus.docs == b.corpus.docs);
  CHECK(a.assignments == b.assignments);

  Rng rng(100);
  GlobalTree tree(8, 2, {3, 2}, 2.0, 0.2, rng);
  const nhdp::GeneratedCorpus single =
      nhdp::generate_nhdp_corpus(tree, 1, 30, nhdp::NhdpPriors{}, rng);
  CHECK(single.corpus.docs.size() == 1);
  CHECK(single.corpus.docs[0].size() == 30);
  CHECK(single.assignments[0].size() == 30);
}

TEST_CASE("per-word walks break the chain property somewhere") {
  Rng rng(21);
  GlobalTree tree(100, 3, {20, 10, 5}, 5.0, 0.1, rng);
  const nhdp::GeneratedCorpus corpus =
      nhdp::generate_nhdp_corpus(tree, 100, 100, nhdp::NhdpPriors{}, rng);
  const nhdp::StructureReport report =
      nhdp::check_structure(corpus.assignments);
  CHECK(report.docs == 100);
  CHECK(report.chain_pass < report.docs);
  CHECK(report.subtree_pass == report.docs);
  // Every assignment path exists in the shared tree, prefixes included.
  for (const auto& doc : corpus.assignments) {
    for (const NodePath& p : doc) {
      for (std::size_t len = 0; len <= p.depth(); ++len) {
        CHECK(tree.contains(p.prefix(len)));
      }
    }
  }
}

TEST_CASE("documents against a frozen tree share transition supports") {
  GlobalTree tree = saturated_tree(22, 6, 2, 3);
  Rng rng(23);
  std::vector<std::int64_t> atoms_seen;
  for (int d = 0; d < 50; ++d) {
    DocumentTree doc(tree, 1.0, SwitchPrior{}, d);
    const DiscreteMeasure t = doc.transition(NodePath{}, rng);
    if (d == 0) {
      atoms_seen = t.atoms;
    } else {
      CHECK(t.atoms == atoms_seen);
    }
  }
}

TEST_CASE("documents concentrate on a dominant subtree") {
  // Shared-tree corpora: the union of assignments spans several depth-1
  // subtrees while most single documents keep a majority of their words in
  // one subtree. Checked as a tendency over 20 replicate corpora.
  Rng seed_rng(24);
  int corpora_passing = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng(seed_rng.next_u64());
    GlobalTree tree(50, 3, {20, 10, 5}, 5.0, 0.1, rng);
    nhdp::NhdpPriors priors;  // Beta(1,2) switches, concentration 1
    const nhdp::GeneratedCorpus corpus =
        nhdp::generate_nhdp_corpus(tree, 500, 100, priors, rng);

    std::set<std::uint32_t> subtrees;
    std::size_t majority_docs = 0;
    for (const auto& doc : corpus.assignments) {
      std::map<std::uint32_t, std::size_t> branch_words;
      for (const NodePath& p : doc) {
        if (p.depth() >= 1) {
          subtrees.insert(p.indices[0]);
          branch_words[p.indices[0]] += 1;
        }
      }
      std::size_t modal = 0;
      for (const auto& [branch, count] : branch_words) {
        modal = std::max(modal, count);
      }
      if (double(modal) >= 0.5 * double(doc.size())) ++majority_docs;
    }
    const bool spans = subtrees.size() > 1;
    const bool majority = majority_docs * 2 >= corpus.assignments.size();
    if (spans && majority) ++corpora_passing;
  }
  CHECK(corpora_passing >= 16);
}
