// Command-line front end: generate synthetic corpora, fit the sampler,
// evaluate held-out perplexity, export trees, and validate path structure.
//
// Exit codes: 0 success, 2 usage/config/input errors, 3 broken internal
// invariant.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nhdp/checks.hpp"
#include "nhdp/corpus.hpp"
#include "nhdp/gibbs.hpp"
#include "nhdp/model.hpp"
#include "nhdp/ncrp.hpp"
#include "nhdp/nhdp.hpp"

namespace fs = std::filesystem;

namespace {

struct GenerateArgs {
  std::string mode = "nhdp";
  std::size_t docs = 100;
  std::size_t words_per_doc = 100;
  std::size_t vocab_size = 100;
  std::size_t depth = 3;
  std::vector<std::size_t> caps = {20, 10, 5};
  double alpha = 5.0;
  double eta = 0.1;
  double gamma = 1.0;
  double doc_conc = 1.0;
  double switch_a = 1.0;
  double switch_b = 2.0;
  std::uint64_t seed = 1;
  std::string out;
};

struct FitArgs {
  std::string corpus;
  std::string vocab;
  std::size_t depth = 3;
  std::vector<std::size_t> caps = {20, 10, 5};
  double alpha = 5.0;
  double eta = 0.1;
  double doc_conc = 1.0;
  double switch_a = 1.0;
  double switch_b = 2.0;
  std::size_t iterations = 2000;
  std::size_t burn_in = 500;
  std::uint64_t seed = 1;
  std::string out;
};

struct EvaluateArgs {
  std::string model;
  std::string corpus;
  std::string vocab;
  std::size_t fit_sweeps = 50;
  std::size_t fit_burn_in = 25;
  std::uint64_t seed = 1;
  std::string out;
};

struct ExportArgs {
  std::string model;
  std::string out;
  std::string format = "json";
  std::size_t top_k = 10;
  bool active_only = false;
};

struct CheckArgs {
  std::string ground_truth;
};

std::string fixed6(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

void write_text(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw nhdp::ConfigError("cannot write " + path.string());
  out << bytes;
}

void write_manifest(const fs::path& path, const std::string& command,
                    const nlohmann::json& flags,
                    const std::vector<std::string>& outputs) {
  nlohmann::json j;
  j["version"] = 1;
  j["command"] = command;
  j["flags"] = flags;
  j["outputs"] = outputs;
  write_text(path, j.dump(2) + "\n");
}

int cmd_generate(const GenerateArgs& args) {
  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);

  nhdp::Rng rng(args.seed);
  nhdp::GlobalTree tree(args.vocab_size, args.depth, args.caps, args.alpha,
                        args.eta, rng);
  nhdp::GeneratedCorpus generated;
  if (args.mode == "nhdp") {
    nhdp::NhdpPriors priors;
    priors.doc_concentration = args.doc_conc;
    priors.switch_prior = {args.switch_a, args.switch_b};
    generated =
        nhdp::generate_nhdp_corpus(tree, args.docs, args.words_per_doc,
                                   priors, rng);
  } else if (args.mode == "ncrp") {
    generated = nhdp::generate_ncrp_corpus(tree, args.gamma, args.docs,
                                           args.words_per_doc, rng);
  } else {
    throw nhdp::ConfigError("unknown mode '" + args.mode +
                            "' (expected nhdp or ncrp)");
  }

  nhdp::save_corpus(generated.corpus, (out_dir / "corpus.bow").string(),
                    (out_dir / "vocab.txt").string());
  nhdp::save_ground_truth(generated.assignments,
                          (out_dir / "ground_truth.json").string());
  nhdp::export_tree_json(tree, generated.corpus.vocab,
                         (out_dir / "tree.json").string(), 10);

  nlohmann::json flags;
  flags["mode"] = args.mode;
  flags["docs"] = args.docs;
  flags["words_per_doc"] = args.words_per_doc;
  flags["vocab_size"] = args.vocab_size;
  flags["depth"] = args.depth;
  flags["caps"] = args.caps;
  flags["alpha"] = args.alpha;
  flags["eta"] = args.eta;
  flags["gamma"] = args.gamma;
  flags["doc_conc"] = args.doc_conc;
  flags["switch_a"] = args.switch_a;
  flags["switch_b"] = args.switch_b;
  flags["seed"] = args.seed;
  flags["out"] = args.out;
  write_manifest(out_dir / "manifest.json", "generate", flags,
                 {"corpus.bow", "vocab.txt", "ground_truth.json",
                  "tree.json"});
  return 0;
}

int cmd_fit(const FitArgs& args) {
  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);

  const nhdp::Corpus corpus = nhdp::load_bow(args.corpus, args.vocab);

  nhdp::InferenceConfig config;
  config.model.vocab_size = corpus.vocab_size();
  config.model.depth = args.depth;
  config.model.child_caps = args.caps;
  config.model.alpha = args.alpha;
  config.model.eta = args.eta;
  config.model.doc_concentration = args.doc_conc;
  config.model.switch_prior = {args.switch_a, args.switch_b};
  config.n_iterations = args.iterations;
  config.burn_in = args.burn_in;
  config.seed = args.seed;
  config.validate();

  nhdp::Rng rng(args.seed);
  nhdp::GibbsState state(corpus, config, rng);

  std::ostringstream log;
  for (std::size_t i = 0; i < config.n_iterations; ++i) {
    const nhdp::SweepStats stats = state.sweep(rng);
    log << nhdp::format_diagnostics_line(stats) << "\n";
  }
  write_text(out_dir / "diagnostics.log", log.str());

  const nhdp::ModelEstimate model = nhdp::estimate_model(state);
  nhdp::save_model(model, (out_dir / "model.json").string());

  nlohmann::json flags;
  flags["corpus"] = args.corpus;
  flags["vocab"] = args.vocab;
  flags["depth"] = args.depth;
  flags["caps"] = args.caps;
  flags["alpha"] = args.alpha;
  flags["eta"] = args.eta;
  flags["doc_conc"] = args.doc_conc;
  flags["switch_a"] = args.switch_a;
  flags["switch_b"] = args.switch_b;
  flags["iterations"] = args.iterations;
  flags["burn_in"] = args.burn_in;
  flags["seed"] = args.seed;
  flags["out"] = args.out;
  write_manifest(out_dir / "manifest.json", "fit", flags,
                 {"model.json", "diagnostics.log"});
  return 0;
}

int cmd_evaluate(const EvaluateArgs& args) {
  const fs::path out_dir(args.out);
  fs::create_directories(out_dir);

  const nhdp::ModelEstimate model = nhdp::load_model(args.model);
  const nhdp::Corpus heldout = nhdp::load_bow(args.corpus, args.vocab);

  nhdp::EvalOptions options;
  options.fit_sweeps = args.fit_sweeps;
  options.fit_burn_in = args.fit_burn_in;
  options.validate();

  nhdp::Rng rng(args.seed);
  const nhdp::PerplexityReport perp =
      nhdp::heldout_perplexity(model, heldout, options, rng);

  std::ostringstream report;
  report << "heldout_docs=" << perp.docs_used << "\n";
  report << "heldout_docs_skipped=" << perp.docs_skipped << "\n";
  report << "heldout_tokens=" << perp.eval_tokens << "\n";
  report << "nhdp_perplexity=" << fixed6(perp.nhdp) << "\n";
  report << "unigram_perplexity=" << fixed6(perp.unigram) << "\n";
  report << "improvement=" << fixed6(1.0 - perp.nhdp / perp.unigram) << "\n";
  report << "active_nodes=" << model.active_node_count() << "\n";
  report << "depth_hist=";
  for (std::size_t i = 0; i < model.depth_histogram.size(); ++i) {
    if (i > 0) report << ",";
    report << model.depth_histogram[i];
  }
  report << "\n";

  write_text(out_dir / "report.txt", report.str());
  std::cout << report.str();

  nlohmann::json flags;
  flags["model"] = args.model;
  flags["corpus"] = args.corpus;
  flags["vocab"] = args.vocab;
  flags["fit_sweeps"] = args.fit_sweeps;
  flags["fit_burn_in"] = args.fit_burn_in;
  flags["seed"] = args.seed;
  flags["out"] = args.out;
  write_manifest(out_dir / "manifest.json", "evaluate", flags,
                 {"report.txt"});
  return 0;
}

int cmd_export_tree(const ExportArgs& args) {
  const nhdp::ModelEstimate model = nhdp::load_model(args.model);
  const std::vector<std::string> vocab =
      nhdp::synthetic_vocab(model.config.vocab_size);
  if (args.format == "json") {
    nhdp::export_tree_json(model, vocab, args.out, args.top_k,
                           args.active_only);
  } else if (args.format == "dot") {
    nhdp::export_tree_dot(model, vocab, args.out, args.top_k);
  } else {
    throw nhdp::ConfigError("unknown format '" + args.format +
                            "' (expected json or dot)");
  }

  nlohmann::json flags;
  flags["model"] = args.model;
  flags["out"] = args.out;
  flags["format"] = args.format;
  flags["top_k"] = args.top_k;
  flags["active_only"] = args.active_only;
  write_manifest(fs::path(args.out).string() + ".manifest.json",
                 "export-tree", flags, {args.out});
  return 0;
}

int cmd_check(const CheckArgs& args) {
  const nhdp::DocumentAssignments truth =
      nhdp::load_ground_truth(args.ground_truth);
  const nhdp::StructureReport report = nhdp::check_structure(truth);
  std::cout << "docs=" << report.docs << "\n";
  std::cout << "chain_pass=" << report.chain_pass << "\n";
  std::cout << "subtree_pass=" << report.subtree_pass << "\n";
  std::cout << "chain=" << (report.all_chain() ? "pass" : "fail") << "\n";
  std::cout << "subtree=" << (report.all_subtree() ? "pass" : "fail") << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical topic modeling: per-word tree walks over a "
               "shared topic tree, with a collapsed Gibbs sampler"};
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand(
      "generate", "Generate a synthetic corpus with ground-truth paths");
  generate->add_option("--mode", gen.mode, "nhdp (per-word paths) or ncrp");
  generate->add_option("--docs", gen.docs, "number of documents");
  generate->add_option("--words-per-doc", gen.words_per_doc);
  generate->add_option("--vocab-size", gen.vocab_size);
  generate->add_option("--depth", gen.depth, "levels below the root");
  generate->add_option("--caps", gen.caps, "per-level child caps")
      ->delimiter(',');
  generate->add_option("--alpha", gen.alpha, "CRP concentration");
  generate->add_option("--eta", gen.eta, "topic Dirichlet parameter");
  generate->add_option("--gamma", gen.gamma, "level stick-breaking (ncrp)");
  generate->add_option("--doc-conc", gen.doc_conc,
                       "document DP concentration (nhdp)");
  generate->add_option("--switch-a", gen.switch_a, "switch prior a (nhdp)");
  generate->add_option("--switch-b", gen.switch_b, "switch prior b (nhdp)");
  generate->add_option("--seed", gen.seed);
  generate->add_option("--out", gen.out, "output directory")->required();

  FitArgs fit;
  CLI::App* fit_cmd =
      app.add_subcommand("fit", "Fit the model by collapsed Gibbs sampling");
  fit_cmd->add_option("--corpus", fit.corpus, "bag-of-words file")
      ->required();
  fit_cmd->add_option("--vocab", fit.vocab, "vocabulary file")->required();
  fit_cmd->add_option("--depth", fit.depth);
  fit_cmd->add_option("--caps", fit.caps)->delimiter(',');
  fit_cmd->add_option("--alpha", fit.alpha);
  fit_cmd->add_option("--eta", fit.eta);
  fit_cmd->add_option("--doc-conc", fit.doc_conc);
  fit_cmd->add_option("--switch-a", fit.switch_a);
  fit_cmd->add_option("--switch-b", fit.switch_b);
  fit_cmd->add_option("--iterations", fit.iterations);
  fit_cmd->add_option("--burn-in", fit.burn_in);
  fit_cmd->add_option("--seed", fit.seed);
  fit_cmd->add_option("--out", fit.out, "output directory")->required();

  EvaluateArgs eval;
  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "Held-out document-completion perplexity report");
  evaluate->add_option("--model", eval.model)->required();
  evaluate->add_option("--corpus", eval.corpus, "held-out bag-of-words")
      ->required();
  evaluate->add_option("--vocab", eval.vocab)->required();
  evaluate->add_option("--fit-sweeps", eval.fit_sweeps);
  evaluate->add_option("--fit-burn-in", eval.fit_burn_in);
  evaluate->add_option("--seed", eval.seed);
  evaluate->add_option("--out", eval.out, "output directory")->required();

  ExportArgs exp;
  CLI::App* export_tree =
      app.add_subcommand("export-tree", "Write a model tree as JSON or DOT");
  export_tree->add_option("--model", exp.model)->required();
  export_tree->add_option("--out", exp.out, "output file")->required();
  export_tree->add_option("--format", exp.format, "json or dot");
  export_tree->add_option("--top-k", exp.top_k, "words per node label");
  export_tree->add_flag("--active-only", exp.active_only,
                        "drop nodes with no assigned words");

  CheckArgs check;
  CLI::App* check_cmd = app.add_subcommand(
      "check", "Validate chain/subtree structure of ground-truth paths");
  check_cmd->add_option("--ground-truth", check.ground_truth)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (fit_cmd->parsed()) return cmd_fit(fit);
    if (evaluate->parsed()) return cmd_evaluate(eval);
    if (export_tree->parsed()) return cmd_export_tree(exp);
    if (check_cmd->parsed()) return cmd_check(check);
  } catch (const nhdp::InternalError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
