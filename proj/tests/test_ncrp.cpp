#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "nhdp/checks.hpp"
#include "nhdp/ncrp.hpp"

using nhdp::GlobalTree;
using nhdp::LevelWeights;
using nhdp::NodePath;
using nhdp::Rng;
using nhdp::Simplex;

TEST_CASE("stick arithmetic with forced sticks") {
  const LevelWeights w =
      nhdp::weights_from_sticks(std::vector<double>{0.5, 0.5, 0.5});
  REQUIRE(w.size() == 4);
  CHECK(w[0] == doctest::Approx(0.5));
  CHECK(w[1] == doctest::Approx(0.25));
  CHECK(w[2] == doctest::Approx(0.125));
  CHECK(w[3] == doctest::Approx(0.125));  // residual at the deepest level
}

TEST_CASE("stick-breaking first weight has mean 1/2 at gamma 1") {
  Rng rng(1);
  const int n = 100000;
  double mean = 0.0;
  for (int i = 0; i < n; ++i) {
    mean += nhdp::stick_breaking_weights(1.0, 3, rng)[0];
  }
  CHECK(std::abs(mean / n - 0.5) < 0.01);
}

TEST_CASE("tiny gamma pushes all mass to the root level") {
  Rng rng(2);
  const LevelWeights w = nhdp::stick_breaking_weights(1e-9, 3, rng);
  CHECK(w[0] > 1.0 - 1e-6);
}

TEST_CASE("stick-breaking rejects bad parameters") {
  Rng rng(3);
  CHECK_THROWS_AS(nhdp::stick_breaking_weights(0.0, 3, rng),
                  nhdp::ConfigError);
  CHECK_THROWS_AS(nhdp::stick_breaking_weights(-1.0, 3, rng),
                  nhdp::ConfigError);
  CHECK_THROWS_AS(nhdp::stick_breaking_weights(1.0, 0, rng),
                  nhdp::ConfigError);
}

TEST_CASE("point mass on the root level keeps words at the root") {
  Rng rng(4);
  GlobalTree tree(3, 3, {4, 4, 4}, 5.0, 0.5, rng);
  const LevelWeights root_only(std::vector<double>{1, 0, 0, 0});
  const nhdp::NcrpDocument doc =
      nhdp::generate_ncrp_document(tree, root_only, 50, rng);
  for (std::uint32_t level : doc.levels) CHECK(level == 0);
  for (std::size_t i = 0; i < doc.words.size(); ++i) {
    CHECK(doc.assignment(i) == NodePath{});
  }
}

TEST_CASE("zero-word document still samples a path") {
  Rng rng(5);
  GlobalTree tree(3, 3, {4, 4, 4}, 5.0, 0.5, rng);
  const nhdp::NcrpDocument doc = nhdp::generate_ncrp_document(tree, 1.0, 0, rng);
  CHECK(doc.words.empty());
  CHECK(doc.levels.empty());
  CHECK(doc.path.depth() == 3);
}

TEST_CASE("chained point masses pin the word identity") {
  Rng rng(6);
  GlobalTree tree(3, 3, {4, 4, 4}, 5.0, 0.5, rng);
  tree.set_topic(NodePath{}, Simplex(std::vector<double>{1, 0, 0}));
  const LevelWeights root_only(std::vector<double>{1, 0, 0, 0});
  const nhdp::NcrpDocument doc =
      nhdp::generate_ncrp_document(tree, root_only, 30, rng);
  for (std::uint32_t w : doc.words) CHECK(w == 0);
}

TEST_CASE("generated documents always satisfy the chain property") {
  Rng rng(7);
  GlobalTree tree(10, 3, {6, 4, 3}, 5.0, 0.1, rng);
  for (int d = 0; d < 200; ++d) {
    const nhdp::NcrpDocument doc =
        nhdp::generate_ncrp_document(tree, 1.0, 40, rng);
    std::vector<NodePath> nodes;
    for (std::size_t i = 0; i < doc.words.size(); ++i) {
      nodes.push_back(doc.assignment(i));
    }
    CHECK(nhdp::chain_property(nodes));
    CHECK(nhdp::subtree_property(nodes));
  }
}

TEST_CASE("word-level frequencies converge to the level weights") {
  // Orthogonal topics per level: each level's node emits words from its own
  // disjoint third of the vocabulary, so the word identity reveals the
  // level.
  Rng rng(8);
  // Near-zero alpha pins later path draws to the pre-seated chain.
  GlobalTree tree(9, 2, {2, 2}, 1e-9, 0.1, rng);
  const NodePath p0;
  const NodePath p1 = tree.sample_child(p0, rng);
  const NodePath p2 = tree.sample_child(p1, rng);
  auto block_topic = [](std::size_t block) {
    std::vector<double> w(9, 0.0);
    for (std::size_t i = 0; i < 3; ++i) w[3 * block + i] = 1.0 / 3;
    return Simplex(w);
  };
  tree.set_topic(p0, block_topic(0));
  tree.set_topic(p1, block_topic(1));
  tree.set_topic(p2, block_topic(2));

  const LevelWeights weights(std::vector<double>{0.5, 0.3, 0.2});
  double level_freq[3] = {0, 0, 0};
  const int n = 100000;
  // One large forced-path document: the first sampled path is (0, 0) on a
  // tree whose counts already pin it.
  const nhdp::NcrpDocument doc =
      nhdp::generate_ncrp_document(tree, weights, n, rng);
  REQUIRE(doc.path == p2);
  for (std::uint32_t w : doc.words) level_freq[w / 3] += 1.0;
  for (int l = 0; l < 3; ++l) {
    CHECK(std::abs(level_freq[l] / n - weights[l]) < 0.01);
  }
}
