#include <doctest.h>

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "nhdp/model.hpp"

using nhdp::ModelEstimate;
using nhdp::ModelNode;
using nhdp::NodePath;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("nhdp_model_" + std::to_string(::getpid()) + "_" +
           std::to_string(counter++));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
  static int counter;
};

int TempDir::counter = 0;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

ModelEstimate tiny_model() {
  ModelEstimate m;
  m.config.vocab_size = 4;
  m.config.depth = 1;
  m.config.child_caps = {2};
  m.config.eta = 0.5;
  m.nodes.resize(3);
  m.nodes[0].path = NodePath{};
  m.nodes[0].total = 6.0;
  m.nodes[0].word_counts = {{0, 4.0}, {2, 2.0}};
  m.nodes[0].child_usage = {3.0, 0.0};
  m.nodes[1].path = NodePath({0});
  m.nodes[1].total = 3.0;
  m.nodes[1].word_counts = {{1, 3.0}};
  m.nodes[1].child_usage = {};
  m.nodes[2].path = NodePath({1});
  m.nodes[2].total = 0.0;
  m.nodes[2].child_usage = {};
  m.doc_weights = {{{0, 0.75}, {1, 0.25}}};
  m.depth_histogram = {6, 3};
  return m;
}

}  // namespace

TEST_CASE("topic means apply eta smoothing; dormant nodes are uniform") {
  const ModelEstimate m = tiny_model();
  // (4 + 0.5) / (6 + 2) at the root for word 0.
  CHECK(m.topic_probability(0, 0) == doctest::Approx(4.5 / 8.0));
  CHECK(m.topic_probability(0, 1) == doctest::Approx(0.5 / 8.0));
  for (std::uint32_t w = 0; w < 4; ++w) {
    CHECK(m.topic_probability(2, w) == doctest::Approx(0.25));
  }
  CHECK(m.active_node_count() == 2);
  CHECK(m.dormant(2));
}

TEST_CASE("model JSON round-trips") {
  TempDir tmp;
  const ModelEstimate m = tiny_model();
  nhdp::save_model(m, tmp.path("m.json"));
  const ModelEstimate back = nhdp::load_model(tmp.path("m.json"));
  CHECK(back.config.vocab_size == m.config.vocab_size);
  CHECK(back.nodes.size() == m.nodes.size());
  CHECK(back.nodes[0].word_counts == m.nodes[0].word_counts);
  CHECK(back.doc_weights == m.doc_weights);
  CHECK(back.depth_histogram == m.depth_histogram);

  nhdp::save_model(back, tmp.path("m2.json"));
  CHECK(slurp(tmp.path("m2.json")) == slurp(tmp.path("m.json")));
}

TEST_CASE("model version and type are enforced") {
  TempDir tmp;
  std::ofstream(tmp.path("bad.json"))
      << "{\"version\": 9, \"type\": \"nhdp-model\"}";
  CHECK_THROWS_AS(nhdp::load_model(tmp.path("bad.json")), nhdp::ParseError);
  std::ofstream(tmp.path("cut.json")) << "{\"version\": 1";
  CHECK_THROWS_AS(nhdp::load_model(tmp.path("cut.json")), nhdp::ParseError);
}

TEST_CASE("tree JSON export is deterministic and filters dormant nodes") {
  TempDir tmp;
  const ModelEstimate m = tiny_model();
  const std::vector<std::string> vocab = {"ant", "bee", "cat", "dog"};
  nhdp::export_tree_json(m, vocab, tmp.path("t.json"), 2, false);
  const std::string bytes = slurp(tmp.path("t.json"));
  CHECK(bytes.find("\"ant\"") != std::string::npos);
  CHECK(bytes.find("0.562500") != std::string::npos);  // 4.5/8 fixed to 6

  nhdp::export_tree_json(m, vocab, tmp.path("t_again.json"), 2, false);
  CHECK(slurp(tmp.path("t_again.json")) == bytes);

  nhdp::export_tree_json(m, vocab, tmp.path("t_active.json"), 2, true);
  const std::string active = slurp(tmp.path("t_active.json"));
  CHECK(active.find("[1]") == std::string::npos);  // dormant node dropped
  CHECK(active != bytes);
}

TEST_CASE("single-node export has one node and no edges") {
  TempDir tmp;
  ModelEstimate m;
  m.config.vocab_size = 2;
  m.config.depth = 1;
  m.config.child_caps = {1};
  m.nodes.resize(2);
  m.nodes[0].path = NodePath{};
  m.nodes[0].total = 1.0;
  m.nodes[0].word_counts = {{0, 1.0}};
  m.nodes[0].child_usage = {0.0};
  m.nodes[1].path = NodePath({0});
  m.nodes[1].child_usage = {};
  const std::vector<std::string> vocab = {"a", "b"};
  nhdp::export_tree_dot(m, vocab, tmp.path("t.dot"), 2);
  const std::string dot = slurp(tmp.path("t.dot"));
  CHECK(dot.find("->") == std::string::npos);
  CHECK(dot.find("n [") != std::string::npos);
}

TEST_CASE("chain export emits one edge per parent/child pair") {
  TempDir tmp;
  ModelEstimate m;
  m.config.vocab_size = 2;
  m.config.depth = 3;
  m.config.child_caps = {1, 1, 1};
  m.nodes.resize(4);
  for (std::size_t i = 0; i < 4; ++i) {
    m.nodes[i].path =
        NodePath(std::vector<std::uint32_t>(i, 0));  // (), (0), (0,0), ...
    m.nodes[i].total = 1.0;
    m.nodes[i].word_counts = {{0, 1.0}};
    if (i < 3) m.nodes[i].child_usage = {1.0};
  }
  const std::vector<std::string> vocab = {"a", "b"};
  nhdp::export_tree_dot(m, vocab, tmp.path("t.dot"), 1);
  const std::string dot = slurp(tmp.path("t.dot"));
  std::size_t edges = 0, at = 0;
  while ((at = dot.find("->", at)) != std::string::npos) {
    ++edges;
    at += 2;
  }
  CHECK(edges == 3);
}

TEST_CASE("dot labels carry exactly top_k words") {
  TempDir tmp;
  const ModelEstimate m = tiny_model();
  const std::vector<std::string> vocab = {"ant", "bee", "cat", "dog"};
  nhdp::export_tree_dot(m, vocab, tmp.path("t.dot"), 2);
  const std::string dot = slurp(tmp.path("t.dot"));
  // Root label: top-2 words by smoothed probability = ant, cat.
  CHECK(dot.find("label=\"ant\\ncat\"") != std::string::npos);
}
