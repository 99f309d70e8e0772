// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line per criterion. Exit code = number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

#include "leveldef/eval.hpp"
#include "leveldef/manchester.hpp"
#include "oracle.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace leveldef;
using test_support::random_matrix;
using test_support::uniform01;

namespace {

int failures = 0;

class Criterion {
 public:
  Criterion(int number, std::string name, double budget_seconds)
      : number_(number), name_(std::move(name)), budget_(budget_seconds),
        start_(std::chrono::steady_clock::now()) {}

  void expect(bool ok, const std::string& what) {
    if (!ok) {
      problems_.push_back(what);
    }
  }

  void finish(bool skipped = false, const std::string& note = "") {
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    if (!skipped && elapsed > budget_) {
      problems_.push_back("runtime " + std::to_string(elapsed) + "s exceeds " +
                          std::to_string(budget_) + "s");
    }
    const bool ok = problems_.empty();
    if (!ok) ++failures;
    std::cout << (skipped ? "SKIP" : ok ? "PASS" : "FAIL") << "  criterion " << number_ << ": "
              << name_;
    std::printf("  (%.2fs)", elapsed);
    if (!note.empty()) std::cout << "  [" << note << "]";
    std::cout << '\n';
    for (const std::string& p : problems_) std::cout << "      - " << p << '\n';
  }

 private:
  int number_;
  std::string name_;
  double budget_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> problems_;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// 1. Readability oracle: hand-evaluated formula values on pre-agreed counts.
// ---------------------------------------------------------------------------

struct ReadabilityRow {
  const char* sentence;
  std::size_t words, sentences, syllables, complex_words, difficult_words;
  double fk, gf, dc;
};

// Counts follow the documented heuristics (vowel-group syllables, proper-noun
// exclusion, familiar-list membership); the expected scores are frozen from an
// independent hand evaluation of the three formulas.
const ReadabilityRow kReadabilityTable[] = {
    {"The cat sat on the mat.", 6, 1, 6, 0, 0,
     -1.4499999999999993, 2.4000000000000004, 0.29759999999999998},
    {"Birds sing in the morning.", 5, 1, 6, 0, 0,
     0.51999999999999957, 2.0, 0.248},
    {"She walked to school with her friend.", 7, 1, 8, 0, 0,
     0.62571428571428456, 2.8000000000000003, 0.34720000000000001},
    {"A beautiful butterfly landed on the flower.", 7, 1, 13, 2, 0,
     9.0542857142857152, 14.228571428571428, 0.34720000000000001},
    {"He said that she left early.", 6, 1, 7, 0, 0,
     0.51666666666666927, 2.4000000000000004, 0.29759999999999998},
    {"The unprecedented phenomenon surprised everyone.", 5, 1, 16, 4, 3,
     24.120000000000008, 34.0, 13.358499999999999},
    {"Dogs bark.", 2, 1, 2, 0, 0,
     -3.0099999999999998, 0.80000000000000004, 0.099199999999999997},
    {"The old farmer planted corn near the river.", 8, 1, 11, 0, 0,
     3.7550000000000026, 3.2000000000000002, 0.39679999999999999},
    {"Children love to play games after school.", 7, 1, 10, 0, 0,
     3.9971428571428582, 2.8000000000000003, 0.34720000000000001},
    {"The sophisticated methodology remained ambiguous.", 5, 1, 17, 4, 3,
     26.480000000000008, 34.0, 13.358499999999999},
    {"Rain fell softly on the quiet town.", 7, 1, 8, 0, 1,
     0.62571428571428456, 2.8000000000000003, 6.239414285714286},
    {"My brother reads a new book every week.", 8, 1, 11, 1, 0,
     3.7550000000000026, 8.2000000000000011, 0.39679999999999999},
    {"The empirical hypothesis was corroborated yesterday.", 6, 1, 18, 4, 3,
     22.150000000000009, 29.06666666666667, 11.8291},
    {"We ate bread and butter for breakfast.", 7, 1, 9, 0, 0,
     2.3114285714285714, 2.8000000000000003, 0.34720000000000001},
    {"A little table stood beside the door.", 7, 1, 10, 0, 0,
     3.9971428571428582, 2.8000000000000003, 0.34720000000000001},
    {"The comprehensive deliberation continued notwithstanding objections.", 6, 1, 20, 5, 5,
     26.083333333333332, 35.733333333333334, 17.092433333333332},
    {"Horses gallop across the open field.", 6, 1, 10, 0, 0,
     6.4166666666666679, 2.4000000000000004, 0.29759999999999998},
    {"Grandmother tells wonderful stories at night.", 6, 1, 11, 2, 0,
     8.3833333333333329, 15.733333333333334, 0.29759999999999998},
    {"The intricate juxtaposition confused the committee.", 6, 1, 15, 3, 4,
     16.25, 22.400000000000002, 14.460766666666668},
    {"Snow covered the hills before winter came.", 7, 1, 11, 1, 0,
     5.682857142857145, 8.5142857142857142, 0.34720000000000001},
};

void criterion_1() {
  Criterion c(1, "readability formulas match hand-evaluated values (1e-9)", 1.0);
  std::size_t rows = 0;
  for (const ReadabilityRow& row : kReadabilityTable) {
    ++rows;
    const double fk = flesch_kincaid(row.words, row.sentences, row.syllables);
    const double gf = gunning_fog(row.words, row.sentences, row.complex_words);
    const double dc = dale_chall(row.words, row.sentences, row.difficult_words);
    const std::string where = std::string("\"") + row.sentence + "\"";
    c.expect(std::fabs(fk - row.fk) <= 1e-9, where + ": flesch-kincaid off");
    c.expect(std::fabs(gf - row.gf) <= 1e-9, where + ": gunning-fog off");
    c.expect(std::fabs(dc - row.dc) <= 1e-9, where + ": dale-chall off");
  }
  c.expect(rows == 20, "expected 20 prepared sentences");
  c.finish();
}

// ---------------------------------------------------------------------------
// 2. Split oracle on 100 random matrices.
// ---------------------------------------------------------------------------

void criterion_2() {
  Criterion c(2, "best_split matches brute-force enumeration on 100 matrices", 30.0);
  std::mt19937_64 gen(20240);
  for (int iter = 0; iter < 100; ++iter) {
    const std::size_t n = 5 + gen() % 196;             // n <= 200
    const std::size_t m_features = 1 + gen() % 4;      // m <= 4
    const int classes = 2 + static_cast<int>(gen() % 5);
    const FeatureMatrix m = random_matrix(gen, n, m_features, classes);
    std::vector<std::size_t> rows(m.n());
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    const auto ours = best_split(m, rows);
    const auto oracle = test_oracle::brute_force_best_split(m, rows);
    if (ours.has_value() != oracle.has_value()) {
      c.expect(false, "iteration " + std::to_string(iter) + ": presence mismatch");
      continue;
    }
    if (!ours) continue;
    c.expect(ours->feature == oracle->feature,
             "iteration " + std::to_string(iter) + ": feature mismatch");
    c.expect(ours->threshold == oracle->threshold,
             "iteration " + std::to_string(iter) + ": threshold mismatch");
    c.expect(std::fabs(ours->impurity_decrease - oracle->decrease) <= 1e-9,
             "iteration " + std::to_string(iter) + ": decrease off by more than 1e-9");
  }
  c.finish();
}

// ---------------------------------------------------------------------------
// 3 + 4 + 5 share ten random-data trees.
// ---------------------------------------------------------------------------

struct TreeBundle {
  FeatureMatrix matrix;
  DecisionTree tree;
  DefinitionSet exact;
  DefinitionSet box;
};

std::vector<TreeBundle> make_bundles() {
  std::vector<TreeBundle> bundles;
  std::mt19937_64 gen(555);
  for (int i = 0; i < 10; ++i) {
    TreeBundle b;
    const std::size_t m_features = 2 + i % 3;
    b.matrix = random_matrix(gen, 240 + 40 * (i % 4), m_features, 2 + i % 5);
    TrainConfig config{.max_depth = 5, .min_samples_branch = 8};
    b.tree = fit(b.matrix, config);
    const ImportanceReport importance = feature_importance(b.tree);
    b.exact = build_definitions(b.tree, importance, DefinitionMode::exact);
    b.box = build_definitions(b.tree, importance, DefinitionMode::box);
    bundles.push_back(std::move(b));
  }
  return bundles;
}

void criterion_3(const std::vector<TreeBundle>& bundles) {
  Criterion c(3, "exact-mode rules agree with predict on 100% of vectors", 10.0);
  std::mt19937_64 gen(556);
  for (std::size_t t = 0; t < bundles.size(); ++t) {
    const TreeBundle& b = bundles[t];
    std::size_t disagreements = 0;
    for (const FeatureVector& row : b.matrix.rows) {
      if (classify_by_rules(b.exact, row).first != predict(b.tree, row)) ++disagreements;
    }
    for (int i = 0; i < 1000; ++i) {
      FeatureVector fv;
      for (std::size_t j = 0; j < b.matrix.m(); ++j) {
        fv.values.push_back(uniform01(gen) * 14.0 - 2.0);
      }
      if (classify_by_rules(b.exact, fv).first != predict(b.tree, fv)) ++disagreements;
    }
    c.expect(disagreements == 0,
             "tree " + std::to_string(t) + ": " + std::to_string(disagreements) +
                 " disagreement(s)");
  }
  c.finish();
}

bool boxes_disjoint(const PathRule& a, const PathRule& b) {
  for (const IntervalConstraint& ca : a.constraints) {
    for (const IntervalConstraint& cb : b.constraints) {
      if (ca.descriptor_id == cb.descriptor_id && !intervals_overlap(ca, cb)) return true;
    }
  }
  return false;
}

void criterion_4(const std::vector<TreeBundle>& bundles) {
  Criterion c(4, "leaf boxes are pairwise disjoint and partition the space", 5.0);
  std::mt19937_64 gen(557);
  for (std::size_t t = 0; t < bundles.size(); ++t) {
    const TreeBundle& b = bundles[t];
    const auto paths = extract_paths(b.tree);
    for (std::size_t i = 0; i < paths.size(); ++i) {
      for (std::size_t k = i + 1; k < paths.size(); ++k) {
        if (!boxes_disjoint(paths[i], paths[k])) {
          c.expect(false, "tree " + std::to_string(t) + ": leaves " + std::to_string(i) +
                              " and " + std::to_string(k) + " overlap");
        }
      }
    }
    std::size_t bad = 0;
    for (int s = 0; s < 10000; ++s) {
      FeatureVector fv;
      for (std::size_t j = 0; j < b.matrix.m(); ++j) {
        fv.values.push_back(uniform01(gen) * 16.0 - 3.0);
      }
      std::size_t hits = 0;
      for (const PathRule& p : paths) {
        if (p.matches(fv, b.tree.catalog)) ++hits;
      }
      if (hits != 1) ++bad;
    }
    c.expect(bad == 0, "tree " + std::to_string(t) + ": " + std::to_string(bad) +
                           " of 10000 samples matched != 1 rule");
  }
  c.finish();
}

void criterion_5(const std::vector<TreeBundle>& bundles) {
  Criterion c(5, "Manchester round-trip and byte-stable ontology emission", 5.0);
  for (std::size_t t = 0; t < bundles.size(); ++t) {
    const TreeBundle& b = bundles[t];
    for (const DefinitionSet* defs : {&b.exact, &b.box}) {
      for (const ClassDefinition& d : defs->definitions) {
        if (d.empty()) continue;
        const std::string text = emit_class_expression(d, defs->catalog);
        const ClassDefinition back = parse_class_expression(text, defs->catalog, d.label);
        c.expect(structurally_equal(back, d),
                 "tree " + std::to_string(t) + ", " + level_name(d.label) + " (" +
                     to_string(defs->mode) + "): parse(emit(d)) != d");
      }
      // Empty-bodied definitions are filtered before emission, as the
      // `ontology` command does.
      DefinitionSet emittable = *defs;
      std::erase_if(emittable.definitions,
                    [](const ClassDefinition& d) { return d.empty(); });
      if (emittable.definitions.empty()) continue;
      const OntologyDoc once = emit_ontology(emittable);
      const OntologyDoc twice = emit_ontology(emittable);
      c.expect(once.text == twice.text,
               "tree " + std::to_string(t) + ": ontology emission not byte-identical");
    }
  }
  c.finish();
}

// ---------------------------------------------------------------------------
// 6. End-to-end statistical check through the CLI.
// ---------------------------------------------------------------------------

struct Cli {
  fs::path workdir;

  int run(const std::string& args) const {
    const std::string cmd = "cd '" + workdir.string() + "' && '" + LEVELDEF_CLI_PATH + "' " +
                            args + " >>cli_log.txt 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  }
};

void criterion_6() {
  Criterion c(6, "pipeline on the synthetic fixture: acc >= 0.9, mae <= 0.15, <= 32 leaves",
              30.0);
  const fs::path wd = fs::temp_directory_path() / "leveldef_acceptance_e2e";
  fs::remove_all(wd);
  fs::create_directories(wd);
  const Cli cli{wd};

  c.expect(cli.run("gen-fixture --out fixture.csv --per-level 200 --seed 42") == 0,
           "gen-fixture failed");
  const int train_rc =
      cli.run("train --corpus fixture.csv --format csv --max-depth 5 --min-branch 50 "
              "--split 0.8 --seed 42 --out run");
  c.expect(train_rc == 0, "train exited with " + std::to_string(train_rc));

  std::error_code ec;
  if (fs::exists(wd / "run" / "eval_report.json", ec)) {
    const auto report = nlohmann::json::parse(slurp(wd / "run" / "eval_report.json"));
    const double acc = report.at("accuracy").get<double>();
    const double mae = report.at("mae").get<double>();
    c.expect(acc >= 0.9, "validation accuracy " + std::to_string(acc) + " < 0.9");
    c.expect(mae <= 0.15, "validation mae " + std::to_string(mae) + " > 0.15");
    const auto tree = nlohmann::json::parse(slurp(wd / "run" / "tree.json"));
    const int leaves = tree.at("summary").at("leaves").get<int>();
    c.expect(leaves <= 32, "tree has " + std::to_string(leaves) + " leaves > 2^5");
  } else {
    c.expect(false, "eval_report.json was not written");
  }
  fs::remove_all(wd, ec);
  c.finish();
}

// ---------------------------------------------------------------------------
// 7. Metric identities.
// ---------------------------------------------------------------------------

void criterion_7() {
  Criterion c(7, "metric identities and the agreement fixture", 2.0);
  std::mt19937_64 gen(558);
  for (int iter = 0; iter < 200; ++iter) {
    const std::size_t n = 1 + gen() % 150;
    std::vector<Level> gold, pred;
    for (std::size_t i = 0; i < n; ++i) {
      gold.push_back(static_cast<Level>(gen() % kLevelCount));
      pred.push_back(static_cast<Level>(gen() % kLevelCount));
    }
    const EvalReport r = evaluate(gold, pred);
    std::int64_t trace = 0;
    for (int k = 0; k < kLevelCount; ++k) trace += r.confusion[k][k];
    const double trace_acc = static_cast<double>(trace) / static_cast<double>(n);
    c.expect(std::fabs(r.accuracy - trace_acc) <= 1e-12,
             "iteration " + std::to_string(iter) + ": accuracy != trace/n");
    c.expect(r.mae >= (1.0 - r.accuracy) - 1e-12,
             "iteration " + std::to_string(iter) + ": mae below the lower bound");
    c.expect(r.mae <= 5.0 * (1.0 - r.accuracy) + 1e-12,
             "iteration " + std::to_string(iter) + ": mae above the upper bound");
  }
  LabeledCorpus dual;
  dual.items.push_back({"a", Level::A1, Level::A2});
  dual.items.push_back({"b", Level::B1, Level::B1});
  c.expect(agreement_score(dual) == 0.5, "agreement on the 2-row fixture != 0.5");
  c.finish();
}

// ---------------------------------------------------------------------------
// 8. Informational: a user-supplied CEFR-SP corpus completes the pipeline.
// ---------------------------------------------------------------------------

void criterion_8() {
  Criterion c(8, "user-supplied corpus trains, evaluates and emits a valid ontology", 600.0);
  const char* path = std::getenv("LEVELDEF_CEFR_SP");
  if (!path || !*path) {
    c.finish(/*skipped=*/true, "set LEVELDEF_CEFR_SP=<corpus file> to run");
    return;
  }
  const fs::path wd = fs::temp_directory_path() / "leveldef_acceptance_sp";
  fs::remove_all(wd);
  fs::create_directories(wd);
  const Cli cli{wd};
  const std::string format =
      std::string(path).ends_with(".jsonl") ? "jsonl" : "csv";
  const int train_rc = cli.run("train --corpus '" + std::string(path) + "' --format " + format +
                               " --seed 42 --out run");
  c.expect(train_rc == 0 || train_rc == 3, "train failed (exit " + std::to_string(train_rc) + ")");
  c.expect(cli.run("evaluate --corpus '" + std::string(path) + "' --format " + format +
                   " --tree run/tree.json --out eval") == 0,
           "evaluate failed");
  const int onto_rc = cli.run("ontology --tree run/tree.json --mode box --out run");
  c.expect(onto_rc == 0 || onto_rc == 3, "ontology failed (exit " + std::to_string(onto_rc) + ")");
  if (fs::exists(wd / "run" / "model.omn")) {
    const std::string omn = slurp(wd / "run" / "model.omn");
    c.expect(omn.find("Class: Utterance") != std::string::npos, "model.omn lacks Utterance");
    c.expect(omn.find("EquivalentTo:") != std::string::npos, "model.omn lacks definitions");
  }
  std::error_code ec;
  fs::remove_all(wd, ec);
  c.finish();
}

}  // namespace

int main() {
  criterion_1();
  criterion_2();
  const auto bundles = make_bundles();
  criterion_3(bundles);
  criterion_4(bundles);
  criterion_5(bundles);
  criterion_6();
  criterion_7();
  criterion_8();
  if (failures == 0) {
    std::cout << "all criteria passed\n";
  } else {
    std::cout << failures << " criterion(s) failed\n";
  }
  return failures;
}
