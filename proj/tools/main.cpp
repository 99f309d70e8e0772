// leveldef: derive interval-based CEFR level definitions from labeled text,
// emit them as a Manchester-syntax ontology, and classify/evaluate with them.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "leveldef/error.hpp"
#include "leveldef/eval.hpp"
#include "leveldef/fixture.hpp"
#include "leveldef/manchester.hpp"

namespace {

using namespace leveldef;

constexpr int kExitOk = 0;
constexpr int kExitInputError = 2;
constexpr int kExitDegenerate = 3;

// --config accepts a JSON object; values apply to options not given on the
// command line (flags override the file).
struct ConfigBinding {
  CLI::Option* option = nullptr;
  std::string key;
  std::function<void(const nlohmann::json&)> apply;
};

struct CommandContext {
  std::string config_path;
  std::vector<ConfigBinding> bindings;

  void bind(CLI::Option* option, std::string key, std::function<void(const nlohmann::json&)> fn) {
    bindings.push_back({option, std::move(key), std::move(fn)});
  }

  void apply_config() const {
    if (config_path.empty()) return;
    std::ifstream in(config_path);
    if (!in) throw Error(Errc::io, "cannot open config: " + config_path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::parse, config_path + ": " + e.what());
    }
    for (const ConfigBinding& b : bindings) {
      if (b.option->count() == 0 && j.contains(b.key)) {
        b.apply(j.at(b.key));
      }
    }
  }
};

void add_config_option(CLI::App* cmd, CommandContext& ctx) {
  cmd->add_option("--config", ctx.config_path, "JSON config file; flags override its values");
}

std::string shortest_double(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return ec == std::errc{} ? std::string(buf, end) : std::to_string(v);
}

void write_features_csv(const FeatureMatrix& matrix, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write features: " + path);
  for (std::size_t j = 0; j < matrix.m(); ++j) {
    out << matrix.catalog.descriptors[j].id << ',';
  }
  out << "label\n";
  for (std::size_t i = 0; i < matrix.n(); ++i) {
    for (std::size_t j = 0; j < matrix.m(); ++j) {
      out << shortest_double(matrix.rows[i][j]) << ',';
    }
    out << level_name(matrix.labels[i]) << '\n';
  }
}

void print_consistency(const ConsistencyReport& report) {
  for (const OverlapFinding& o : report.overlaps) {
    std::cout << "consistency: boxes of " << level_name(o.a) << " and " << level_name(o.b)
              << " overlap";
    if (!o.region.empty()) {
      std::cout << " on";
      for (const IntervalConstraint& c : o.region) std::cout << ' ' << c.descriptor_id;
    }
    std::cout << '\n';
  }
  for (Level l : report.empty_definitions) {
    std::cout << "consistency: definition of " << level_name(l) << " is empty (contradictory)\n";
  }
  for (Level l : report.vacuous_definitions) {
    std::cout << "consistency: definition of " << level_name(l) << " has no constraints\n";
  }
  if (report.partition_checked) {
    std::cout << "consistency: leaf boxes "
              << (report.pairwise_disjoint ? "are pairwise disjoint" : "OVERLAP") << ", "
              << (report.covers_space ? "cover" : "DO NOT cover") << " the sampled space ("
              << report.coverage_samples << " samples)\n";
  }
  if (report.clean() && !report.partition_checked) {
    std::cout << "consistency: no findings\n";
  }
}

struct CommonIo {
  std::string corpus_path;
  std::string format = "csv";
  std::string catalog_path;
  std::string data_dir;
  std::string out_dir = "out";
};

void add_common_io(CLI::App* cmd, CommonIo& io, CommandContext& ctx) {
  // Required inputs are validated after the config file is applied, so
  // --config can supply them.
  auto* corpus = cmd->add_option("--corpus", io.corpus_path, "labeled corpus file");
  auto* format = cmd->add_option("--format", io.format, "corpus format: csv or jsonl")
                     ->check(CLI::IsMember({"csv", "jsonl"}));
  auto* catalog = cmd->add_option("--catalog", io.catalog_path,
                                  "feature catalog JSON (defaults to the built-in catalog)");
  auto* data = cmd->add_option("--data-dir", io.data_dir,
                               "directory with the word list and lexicons");
  auto* out = cmd->add_option("--out", io.out_dir, "output directory");
  ctx.bind(corpus, "corpus", [&io](const nlohmann::json& v) { io.corpus_path = v.get<std::string>(); });
  ctx.bind(format, "format", [&io](const nlohmann::json& v) { io.format = v.get<std::string>(); });
  ctx.bind(catalog, "catalog", [&io](const nlohmann::json& v) { io.catalog_path = v.get<std::string>(); });
  ctx.bind(data, "data_dir", [&io](const nlohmann::json& v) { io.data_dir = v.get<std::string>(); });
  ctx.bind(out, "out", [&io](const nlohmann::json& v) { io.out_dir = v.get<std::string>(); });
}

Lexicons open_lexicons(const CommonIo& io) {
  return io.data_dir.empty() ? Lexicons::bundled() : Lexicons::load(io.data_dir);
}

void require_value(const std::string& value, const char* flag) {
  if (value.empty()) {
    throw Error(Errc::io, std::string("missing ") + flag + " (pass the flag or set it in --config)");
  }
}

FeatureCatalog open_catalog(const CommonIo& io) {
  return io.catalog_path.empty() ? default_catalog() : load_catalog(io.catalog_path);
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_features(const CommonIo& io) {
  require_value(io.corpus_path, "--corpus");
  const Lexicons lex = open_lexicons(io);
  const LabeledCorpus corpus = load_corpus(io.corpus_path, parse_corpus_format(io.format));
  const FeatureCatalog catalog = open_catalog(io);
  const FeatureMatrix matrix = build_matrix(corpus, catalog, lex);
  std::filesystem::create_directories(io.out_dir);
  const std::string path = io.out_dir + "/features.csv";
  write_features_csv(matrix, path);
  std::cout << "N=" << matrix.n() << " m=" << matrix.m() << '\n';
  std::cout << "wrote " << path << '\n';
  return kExitOk;
}

struct TrainOptions {
  TrainConfig config;
  int min_leaf = -1;
  double split = 0.8;
  std::uint64_t seed = 42;
};

int run_train(const CommonIo& io, const TrainOptions& opts) {
  require_value(io.corpus_path, "--corpus");
  const Lexicons lex = open_lexicons(io);
  const LabeledCorpus corpus = load_corpus(io.corpus_path, parse_corpus_format(io.format));
  const FeatureCatalog catalog = open_catalog(io);

  TrainConfig config = opts.config;
  if (opts.min_leaf > 0) config.min_samples_leaf = opts.min_leaf;

  const SplitResult split = stratified_split(corpus, opts.split, opts.seed);
  const FeatureMatrix train = build_matrix(split.train, catalog, lex);
  const FeatureMatrix validation = build_matrix(split.validation, catalog, lex);

  const DecisionTree tree = fit(train, config);
  const ImportanceReport importance = feature_importance(tree);

  std::vector<Level> pred;
  pred.reserve(validation.n());
  for (const FeatureVector& fv : validation.rows) pred.push_back(predict(tree, fv));
  const EvalReport eval = evaluate(validation.labels, pred);

  std::filesystem::create_directories(io.out_dir);
  save_tree(tree, io.out_dir + "/tree.json");
  write_importance_csv(importance, io.out_dir + "/importance.csv");
  write_reports(eval, &importance, nullptr, io.out_dir);

  std::cout << "train=" << train.n() << " validation=" << validation.n() << " nodes="
            << tree.node_count() << " leaves=" << tree.leaf_count() << '\n';
  std::cout << "validation accuracy=" << eval.accuracy << " mae=" << eval.mae << '\n';
  std::cout << "wrote " << io.out_dir << "/tree.json, importance.csv, eval_report.{json,csv,txt}\n";
  if (tree.leaf_count() == 1) {
    std::cerr << "warning: support/depth constraints forbade every split; "
                 "the tree is a single leaf\n";
    return kExitDegenerate;
  }
  return kExitOk;
}

int run_ontology(const std::string& tree_path, const std::string& mode_name,
                 const std::string& iri, const std::string& out_dir) {
  require_value(tree_path, "--tree");
  const DecisionTree tree = load_tree(tree_path);
  const DefinitionMode mode = parse_definition_mode(mode_name);
  const ImportanceReport importance = feature_importance(tree);
  DefinitionSet defs = build_definitions(tree, importance, mode);

  bool degenerate = false;
  std::vector<ClassDefinition> kept;
  for (ClassDefinition& def : defs.definitions) {
    if (def.empty()) {
      std::cerr << "warning: definition of " << level_name(def.label)
                << " has no usable constraints; skipping it\n";
      degenerate = true;
    } else {
      kept.push_back(std::move(def));
    }
  }
  defs.definitions = std::move(kept);

  const ConsistencyReport consistency = check_consistency(defs);
  print_consistency(consistency);
  if (defs.definitions.empty()) {
    std::cerr << "error: no non-empty definitions; nothing to emit\n";
    return kExitDegenerate;
  }

  std::filesystem::create_directories(out_dir);
  save_definitions(defs, out_dir + "/defs.json");
  const OntologyDoc doc = emit_ontology(defs, iri);
  save_ontology(doc, out_dir + "/model.omn");

  for (const ClassDefinition& def : defs.definitions) {
    std::size_t constraints = def.constraints.size();
    for (const PathRule& p : def.paths) constraints += p.constraints.size();
    std::cout << level_name(def.label) << "LevelUtterance: "
              << (defs.mode == DefinitionMode::exact
                      ? std::to_string(def.paths.size()) + " paths, "
                      : "")
              << constraints << " constraints\n";
  }
  std::cout << "wrote " << out_dir << "/model.omn and defs.json\n";
  return degenerate ? kExitDegenerate : kExitOk;
}

int run_classify(const std::string& defs_path, const std::string& tree_path,
                 const std::string& mode_name, const std::string& in_path,
                 const std::string& out_path, const std::string& data_dir) {
  DefinitionSet defs;
  if (!defs_path.empty()) {
    defs = load_definitions(defs_path);
  } else if (!tree_path.empty()) {
    const DecisionTree tree = load_tree(tree_path);
    defs = build_definitions(tree, feature_importance(tree), parse_definition_mode(mode_name));
  } else {
    throw Error(Errc::io, "classify needs --defs or --tree");
  }
  CommonIo io;
  io.data_dir = data_dir;
  const Lexicons lex = open_lexicons(io);

  std::istream* in = &std::cin;
  std::ifstream file_in;
  if (in_path != "-") {
    file_in.open(in_path, std::ios::binary);
    if (!file_in) throw Error(Errc::io, "cannot open input: " + in_path);
    in = &file_in;
  }
  std::ostream* out = &std::cout;
  std::ofstream file_out;
  if (out_path != "-") {
    file_out.open(out_path, std::ios::binary);
    if (!file_out) throw Error(Errc::io, "cannot write output: " + out_path);
    out = &file_out;
  }

  std::string line;
  while (std::getline(*in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const FeatureVector fv = extract_features(line, defs.catalog, lex);
    const auto [label, diag] = classify_by_rules(defs, fv);
    nlohmann::ordered_json j;
    j["text"] = line;
    j["label"] = level_name(label);
    nlohmann::ordered_json matched = nlohmann::ordered_json::array();
    for (Level l : diag.candidates) matched.push_back(level_name(l));
    j["diagnostics"] = {{"matched", std::move(matched)},
                        {"fallback", diag.fallback},
                        {"ambiguous", diag.ambiguous}};
    *out << j.dump() << '\n';
  }
  return kExitOk;
}

int run_evaluate(const CommonIo& io, const std::string& tree_path,
                 const std::string& defs_path) {
  require_value(io.corpus_path, "--corpus");
  const Lexicons lex = open_lexicons(io);
  const LabeledCorpus corpus = load_corpus(io.corpus_path, parse_corpus_format(io.format));

  DefinitionSet defs;
  const DecisionTree* tree_ptr = nullptr;
  DecisionTree tree;
  if (!tree_path.empty()) {
    tree = load_tree(tree_path);
    tree_ptr = &tree;
  } else if (!defs_path.empty()) {
    defs = load_definitions(defs_path);
  } else {
    throw Error(Errc::io, "evaluate needs --tree or --defs");
  }
  const FeatureCatalog& catalog = tree_ptr ? tree.catalog : defs.catalog;

  std::vector<Level> gold, pred;
  gold.reserve(corpus.size());
  pred.reserve(corpus.size());
  std::size_t fallbacks = 0;
  for (const CorpusItem& item : corpus.items) {
    const FeatureVector fv = extract_features(item.text, catalog, lex);
    gold.push_back(item.label);
    if (tree_ptr) {
      pred.push_back(predict(*tree_ptr, fv));
    } else {
      const auto [label, diag] = classify_by_rules(defs, fv);
      pred.push_back(label);
      if (diag.fallback) ++fallbacks;
    }
  }
  const EvalReport eval = evaluate(gold, pred);
  write_reports(eval, nullptr, nullptr, io.out_dir);
  std::cout << "n=" << eval.n << " accuracy=" << eval.accuracy << " mae=" << eval.mae << '\n';
  if (fallbacks > 0) {
    std::cout << fallbacks << " items matched no definition (nearest-box fallback)\n";
  }
  bool dual = !corpus.items.empty();
  for (const CorpusItem& item : corpus.items) {
    if (!item.label2) dual = false;
  }
  if (dual) {
    std::cout << "inter-annotator agreement=" << agreement_score(corpus) << '\n';
  }
  std::cout << "wrote " << io.out_dir << "/eval_report.{json,csv,txt}\n";
  return kExitOk;
}

int run_gen_fixture(const std::string& out_path, const std::string& format,
                    std::size_t per_level, std::uint64_t seed) {
  FixtureParams params;
  params.texts_per_level = per_level;
  params.seed = seed;
  const LabeledCorpus corpus = generate_fixture_corpus(params);
  if (const auto dir = std::filesystem::path(out_path).parent_path(); !dir.empty()) {
    std::filesystem::create_directories(dir);
  }
  save_corpus(corpus, out_path, parse_corpus_format(format));
  std::cout << "N=" << corpus.size() << " wrote " << out_path << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interval-based CEFR level definitions from labeled text"};
  app.require_subcommand(1);

  // features
  auto* features = app.add_subcommand("features", "extract the feature matrix to CSV");
  CommandContext features_ctx;
  CommonIo features_io;
  add_common_io(features, features_io, features_ctx);
  add_config_option(features, features_ctx);

  // train
  auto* train = app.add_subcommand("train", "fit the constrained decision tree and evaluate");
  CommandContext train_ctx;
  CommonIo train_io;
  TrainOptions train_opts;
  add_common_io(train, train_io, train_ctx);
  {
    auto* o1 = train->add_option("--max-depth", train_opts.config.max_depth, "maximum tree depth")
                   ->check(CLI::PositiveNumber);
    auto* o2 = train->add_option("--min-branch", train_opts.config.min_samples_branch,
                                 "minimum samples in each created branch")
                   ->check(CLI::PositiveNumber);
    auto* o3 = train->add_option("--min-leaf", train_opts.min_leaf,
                                 "per-leaf minimum (defaults to --min-branch)");
    auto* o4 = train->add_option("--importance-threshold", train_opts.config.importance_threshold,
                                 "normalized importance below which descriptors are dropped "
                                 "from box definitions");
    auto* o5 = train->add_option("--split", train_opts.split, "train fraction in (0,1)");
    auto* o6 = train->add_option("--seed", train_opts.seed, "split shuffle seed");
    train_ctx.bind(o1, "max_depth", [&](const nlohmann::json& v) { train_opts.config.max_depth = v.get<int>(); });
    train_ctx.bind(o2, "min_branch", [&](const nlohmann::json& v) { train_opts.config.min_samples_branch = v.get<int>(); });
    train_ctx.bind(o3, "min_leaf", [&](const nlohmann::json& v) { train_opts.min_leaf = v.get<int>(); });
    train_ctx.bind(o4, "importance_threshold", [&](const nlohmann::json& v) { train_opts.config.importance_threshold = v.get<double>(); });
    train_ctx.bind(o5, "split", [&](const nlohmann::json& v) { train_opts.split = v.get<double>(); });
    train_ctx.bind(o6, "seed", [&](const nlohmann::json& v) { train_opts.seed = v.get<std::uint64_t>(); });
  }
  add_config_option(train, train_ctx);

  // ontology
  auto* ontology = app.add_subcommand("ontology", "emit Manchester-syntax definitions from a tree");
  CommandContext ontology_ctx;
  std::string ontology_tree, ontology_mode = "box", ontology_iri = kDefaultOntologyIri,
              ontology_out = "out";
  {
    auto* o1 = ontology->add_option("--tree", ontology_tree, "tree JSON from `train`");
    auto* o2 = ontology->add_option("--mode", ontology_mode, "definition mode: box or exact")
                   ->check(CLI::IsMember({"box", "exact"}));
    auto* o3 = ontology->add_option("--iri", ontology_iri, "ontology IRI");
    auto* o4 = ontology->add_option("--out", ontology_out, "output directory");
    ontology_ctx.bind(o1, "tree", [&](const nlohmann::json& v) { ontology_tree = v.get<std::string>(); });
    ontology_ctx.bind(o2, "mode", [&](const nlohmann::json& v) { ontology_mode = v.get<std::string>(); });
    ontology_ctx.bind(o3, "iri", [&](const nlohmann::json& v) { ontology_iri = v.get<std::string>(); });
    ontology_ctx.bind(o4, "out", [&](const nlohmann::json& v) { ontology_out = v.get<std::string>(); });
  }
  add_config_option(ontology, ontology_ctx);

  // classify
  auto* classify = app.add_subcommand("classify", "label texts with the definitions");
  CommandContext classify_ctx;
  std::string classify_defs, classify_tree, classify_mode = "exact", classify_in = "-",
              classify_out = "-", classify_data;
  {
    auto* o1 = classify->add_option("--defs", classify_defs, "definition set JSON");
    auto* o2 = classify->add_option("--tree", classify_tree, "tree JSON (compiled on the fly)");
    auto* o3 = classify->add_option("--mode", classify_mode, "mode when compiling from a tree")
                   ->check(CLI::IsMember({"box", "exact"}));
    auto* o4 = classify->add_option("--in", classify_in, "input texts, one per line ('-' = stdin)");
    auto* o5 = classify->add_option("--out", classify_out, "output JSONL ('-' = stdout)");
    auto* o6 = classify->add_option("--data-dir", classify_data, "word list / lexicon directory");
    classify_ctx.bind(o1, "defs", [&](const nlohmann::json& v) { classify_defs = v.get<std::string>(); });
    classify_ctx.bind(o2, "tree", [&](const nlohmann::json& v) { classify_tree = v.get<std::string>(); });
    classify_ctx.bind(o3, "mode", [&](const nlohmann::json& v) { classify_mode = v.get<std::string>(); });
    classify_ctx.bind(o4, "in", [&](const nlohmann::json& v) { classify_in = v.get<std::string>(); });
    classify_ctx.bind(o5, "out", [&](const nlohmann::json& v) { classify_out = v.get<std::string>(); });
    classify_ctx.bind(o6, "data_dir", [&](const nlohmann::json& v) { classify_data = v.get<std::string>(); });
  }
  add_config_option(classify, classify_ctx);

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "score a labeled corpus with a tree or defs");
  CommandContext evaluate_ctx;
  CommonIo evaluate_io;
  std::string evaluate_tree, evaluate_defs;
  add_common_io(evaluate_cmd, evaluate_io, evaluate_ctx);
  {
    auto* o1 = evaluate_cmd->add_option("--tree", evaluate_tree, "tree JSON");
    auto* o2 = evaluate_cmd->add_option("--defs", evaluate_defs, "definition set JSON");
    evaluate_ctx.bind(o1, "tree", [&](const nlohmann::json& v) { evaluate_tree = v.get<std::string>(); });
    evaluate_ctx.bind(o2, "defs", [&](const nlohmann::json& v) { evaluate_defs = v.get<std::string>(); });
  }
  add_config_option(evaluate_cmd, evaluate_ctx);

  // gen-fixture (hidden): synthetic monotone corpus for self-contained runs
  auto* fixture = app.add_subcommand("gen-fixture", "generate the synthetic acceptance corpus");
  fixture->group("");
  std::string fixture_out = "fixture.csv", fixture_format = "csv";
  std::size_t fixture_per_level = 200;
  std::uint64_t fixture_seed = 42;
  fixture->add_option("--out", fixture_out, "output corpus path");
  fixture->add_option("--format", fixture_format, "csv or jsonl")
      ->check(CLI::IsMember({"csv", "jsonl"}));
  fixture->add_option("--per-level", fixture_per_level, "texts per level");
  fixture->add_option("--seed", fixture_seed, "generator seed");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*features) {
      features_ctx.apply_config();
      return run_features(features_io);
    }
    if (*train) {
      train_ctx.apply_config();
      return run_train(train_io, train_opts);
    }
    if (*ontology) {
      ontology_ctx.apply_config();
      return run_ontology(ontology_tree, ontology_mode, ontology_iri, ontology_out);
    }
    if (*classify) {
      classify_ctx.apply_config();
      return run_classify(classify_defs, classify_tree, classify_mode, classify_in, classify_out,
                          classify_data);
    }
    if (*evaluate_cmd) {
      evaluate_ctx.apply_config();
      return run_evaluate(evaluate_io, evaluate_tree, evaluate_defs);
    }
    if (*fixture) {
      return run_gen_fixture(fixture_out, fixture_format, fixture_per_level, fixture_seed);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return kExitOk;
}
