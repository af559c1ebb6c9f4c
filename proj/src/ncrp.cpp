#include "nhdp/ncrp.hpp"

namespace nhdp {

LevelWeights weights_from_sticks(std::span<const double> sticks) {
  std::vector<double> w(sticks.size() + 1, 0.0);
  double remaining = 1.0;
  for (std::size_t i = 0; i < sticks.size(); ++i) {
    if (!(sticks[i] >= 0.0) || sticks[i] > 1.0) {
      throw ConfigError("stick fractions must lie in [0, 1]");
    }
    w[i] = sticks[i] * remaining;
    remaining *= 1.0 - sticks[i];
  }
  // Deepest level absorbs the residual so the weights are an exact simplex.
  w[sticks.size()] = remaining;
  return LevelWeights(std::move(w));
}

LevelWeights stick_breaking_weights(double gamma, std::size_t levels,
                                    Rng& rng) {
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (levels < 1) throw ConfigError("need at least one level");
  std::vector<double> sticks(levels);
  for (double& v : sticks) v = sample_beta(1.0, gamma, rng);
  return weights_from_sticks(sticks);
}

NcrpDocument generate_ncrp_document(GlobalTree& tree, double gamma,
                                    std::size_t n_words, Rng& rng) {
  LevelWeights weights = stick_breaking_weights(gamma, tree.max_depth(), rng);
  return generate_ncrp_document(tree, std::move(weights), n_words, rng);
}

NcrpDocument generate_ncrp_document(GlobalTree& tree,
                                    LevelWeights level_weights,
                                    std::size_t n_words, Rng& rng) {
  if (level_weights.size() != tree.max_depth() + 1) {
    throw ConfigError("level weights must have max_depth + 1 entries");
  }
  NcrpDocument doc{tree.sample_path(rng), std::move(level_weights), {}, {}};
  doc.words.reserve(n_words);
  doc.levels.reserve(n_words);
  for (std::size_t i = 0; i < n_words; ++i) {
    const auto level =
        static_cast<std::uint32_t>(sample_discrete(doc.level_weights, rng));
    const Simplex& topic = tree.node(doc.path.prefix(level)).topic;
    doc.levels.push_back(level);
    doc.words.push_back(
        static_cast<std::uint32_t>(sample_discrete(topic, rng)));
  }
  return doc;
}

GeneratedCorpus generate_ncrp_corpus(GlobalTree& tree, double gamma,
                                     std::size_t n_docs,
                                     std::size_t words_per_doc, Rng& rng) {
  GeneratedCorpus out;
  out.corpus.vocab = synthetic_vocab(tree.vocab_size());
  for (std::size_t d = 0; d < n_docs; ++d) {
    NcrpDocument doc = generate_ncrp_document(tree, gamma, words_per_doc, rng);
    std::vector<NodePath> truth;
    truth.reserve(doc.words.size());
    for (std::size_t i = 0; i < doc.words.size(); ++i) {
      truth.push_back(doc.assignment(i));
    }
    out.corpus.docs.push_back(std::move(doc.words));
    out.assignments.push_back(std::move(truth));
  }
  return out;
}

}  // namespace nhdp
