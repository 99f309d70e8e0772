#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leveldef/corpus.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workdir {
  fs::path path;
  Workdir() {
    static std::mt19937_64 gen(std::random_device{}());
    path = fs::temp_directory_path() / ("leveldef_cli_" + std::to_string(gen()));
    fs::create_directories(path);
  }
  ~Workdir() { fs::remove_all(path); }
};

CliResult run_cli(const Workdir& wd, const std::string& args) {
  const fs::path out = wd.path / "_stdout.txt";
  const fs::path err = wd.path / "_stderr.txt";
  const std::string cmd = "cd '" + wd.path.string() + "' && '" + LEVELDEF_CLI_PATH + "' " + args +
                          " >'" + out.string() + "' 2>'" + err.string() + "'";
  const int raw = std::system(cmd.c_str());
  CliResult result;
  result.exit_code = WEXITSTATUS(raw);
  result.out = slurp(out);
  result.err = slurp(err);
  return result;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

std::string tiny_corpus_csv() {
  return "text,label\n"
         "The cat sat on the mat. The dog ran.,A1\n"
         "He walked to school. The sun was warm. Finally he arrived.,A1\n"
         "Dogs bark at night. Cats sleep all day. Birds sing.,A2\n"
         "She reads a new book every week. Her friends play outside.,A2\n";
}

}  // namespace

TEST_CASE("cli: gen-fixture is deterministic and loadable") {
  Workdir wd;
  const CliResult r1 = run_cli(wd, "gen-fixture --out fix1.csv --per-level 10 --seed 99");
  CHECK(r1.exit_code == 0);
  CHECK(r1.out.find("N=60") != std::string::npos);
  const CliResult r2 = run_cli(wd, "gen-fixture --out fix2.csv --per-level 10 --seed 99");
  CHECK(r2.exit_code == 0);
  CHECK(slurp(wd.path / "fix1.csv") == slurp(wd.path / "fix2.csv"));

  const auto corpus = leveldef::load_corpus((wd.path / "fix1.csv").string(),
                                            leveldef::CorpusFormat::csv);
  CHECK(corpus.size() == 60);
}

TEST_CASE("cli: features") {
  Workdir wd;
  write_file(wd.path / "corpus.csv", tiny_corpus_csv());

  SUBCASE("writes an N x (m+1) csv and prints the shape") {
    const CliResult r = run_cli(wd, "features --corpus corpus.csv --format csv --out run");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("N=4 m=10") != std::string::npos);
    const std::string csv = slurp(wd.path / "run" / "features.csv");
    std::size_t lines = 0;
    for (char c : csv) {
      if (c == '\n') ++lines;
    }
    CHECK(lines == 5);  // header + 4 rows
    CHECK(csv.find("flesch_kincaid,") == 0);
    CHECK(csv.find(",label\n") != std::string::npos);
  }
  SUBCASE("custom catalog restricts the columns") {
    write_file(wd.path / "catalog.json",
               R"([{"id":"avg_sentence_length","kind":"syntactic","value_type":"numeric"}])");
    const CliResult r =
        run_cli(wd, "features --corpus corpus.csv --catalog catalog.json --out run_c");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("N=4 m=1") != std::string::npos);
    const std::string csv = slurp(wd.path / "run_c" / "features.csv");
    CHECK(csv.rfind("avg_sentence_length,label\n", 0) == 0);
  }
  SUBCASE("missing file: exit 2, message names the path") {
    const CliResult r = run_cli(wd, "features --corpus nope.csv --format csv");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("nope.csv") != std::string::npos);
  }
  SUBCASE("jsonl format on csv content: parse error naming line 1") {
    const CliResult r = run_cli(wd, "features --corpus corpus.csv --format jsonl");
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("line 1") != std::string::npos);
  }
}

TEST_CASE("cli: train behavior") {
  Workdir wd;

  SUBCASE("small corpus with the default 50-sample branch floor: exit 3, single leaf") {
    leveldef::LabeledCorpus corpus;
    std::mt19937_64 gen(4);
    const char* words[] = {"good", "small", "day", "work", "play", "home"};
    for (int i = 0; i < 40; ++i) {
      std::string text = "The";
      for (int w = 0; w < 4 + static_cast<int>(gen() % 3); ++w) {
        text += ' ';
        text += words[gen() % 6];
      }
      text += '.';
      corpus.items.push_back({text, i % 2 == 0 ? leveldef::Level::A1 : leveldef::Level::C2,
                              std::nullopt});
    }
    leveldef::save_corpus(corpus, (wd.path / "small.csv").string(), leveldef::CorpusFormat::csv);
    const CliResult r = run_cli(wd, "train --corpus small.csv --out run --seed 1");
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("single leaf") != std::string::npos);
    const auto tree = nlohmann::json::parse(slurp(wd.path / "run" / "tree.json"));
    CHECK(tree.at("summary").at("leaves").get<int>() == 1);
    CHECK(fs::exists(wd.path / "run" / "eval_report.json"));  // outputs still written
  }

  SUBCASE("max-depth 1 yields at most three nodes; reruns are byte-identical") {
    const CliResult gen_r = run_cli(wd, "gen-fixture --out fix.csv --per-level 20 --seed 5");
    REQUIRE(gen_r.exit_code == 0);
    const CliResult r1 = run_cli(
        wd, "train --corpus fix.csv --max-depth 1 --min-branch 5 --seed 2 --out run1");
    CHECK(r1.exit_code == 0);
    const auto tree = nlohmann::json::parse(slurp(wd.path / "run1" / "tree.json"));
    CHECK(tree.at("summary").at("nodes").get<int>() <= 3);
    const CliResult r2 = run_cli(
        wd, "train --corpus fix.csv --max-depth 1 --min-branch 5 --seed 2 --out run2");
    CHECK(r2.exit_code == 0);
    CHECK(slurp(wd.path / "run1" / "tree.json") == slurp(wd.path / "run2" / "tree.json"));
    CHECK(slurp(wd.path / "run1" / "eval_report.json") ==
          slurp(wd.path / "run2" / "eval_report.json"));
  }

  SUBCASE("config file supplies defaults, flags override") {
    const CliResult gen_r = run_cli(wd, "gen-fixture --out fix.csv --per-level 20 --seed 5");
    REQUIRE(gen_r.exit_code == 0);
    write_file(wd.path / "cfg.json",
               R"({"corpus":"fix.csv","max_depth":1,"min_branch":5,"seed":2,"out":"cfg_run"})");
    const CliResult r = run_cli(wd, "train --config cfg.json");
    CHECK(r.exit_code == 0);
    const auto tree = nlohmann::json::parse(slurp(wd.path / "cfg_run" / "tree.json"));
    CHECK(tree.at("config").at("max_depth").get<int>() == 1);
    const CliResult r2 = run_cli(wd, "train --config cfg.json --max-depth 3 --out flag_run");
    CHECK(r2.exit_code == 0);
    const auto tree2 = nlohmann::json::parse(slurp(wd.path / "flag_run" / "tree.json"));
    CHECK(tree2.at("config").at("max_depth").get<int>() == 3);
  }
}

TEST_CASE("cli: ontology, classify and evaluate close the loop") {
  Workdir wd;
  REQUIRE(run_cli(wd, "gen-fixture --out fix.csv --per-level 40 --seed 11").exit_code == 0);
  REQUIRE(run_cli(wd, "train --corpus fix.csv --min-branch 10 --seed 7 --out run").exit_code == 0);

  SUBCASE("ontology writes a parseable document and defs") {
    const CliResult r = run_cli(wd, "ontology --tree run/tree.json --mode box --out run");
    CHECK(r.exit_code == 0);
    const std::string omn = slurp(wd.path / "run" / "model.omn");
    CHECK(omn.find("Class: Utterance") != std::string::npos);
    CHECK(omn.find("EquivalentTo: Utterance and") != std::string::npos);
    CHECK(fs::exists(wd.path / "run" / "defs.json"));
    const CliResult r2 = run_cli(wd, "ontology --tree run/tree.json --mode box --out run2");
    CHECK(r2.exit_code == 0);
    CHECK(slurp(wd.path / "run2" / "model.omn") == omn);  // byte-stable
  }

  SUBCASE("classify via exact defs reproduces tree predictions") {
    REQUIRE(run_cli(wd, "ontology --tree run/tree.json --mode exact --out run").exit_code == 0);
    std::string lines;
    const auto corpus =
        leveldef::load_corpus((wd.path / "fix.csv").string(), leveldef::CorpusFormat::csv);
    for (std::size_t i = 0; i < 30; ++i) lines += corpus.items[i * 7].text + "\n";
    write_file(wd.path / "texts.txt", lines);
    const CliResult by_defs =
        run_cli(wd, "classify --defs run/defs.json --in texts.txt --out by_defs.jsonl");
    CHECK(by_defs.exit_code == 0);
    const CliResult by_tree = run_cli(
        wd, "classify --tree run/tree.json --mode exact --in texts.txt --out by_tree.jsonl");
    CHECK(by_tree.exit_code == 0);
    CHECK(slurp(wd.path / "by_defs.jsonl") == slurp(wd.path / "by_tree.jsonl"));
    std::istringstream in(slurp(wd.path / "by_defs.jsonl"));
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
      const auto j = nlohmann::json::parse(line);
      CHECK(j.contains("text"));
      CHECK(j.contains("label"));
      CHECK(!j.at("diagnostics").at("fallback").get<bool>());
      ++rows;
    }
    CHECK(rows == 30);
  }

  SUBCASE("text outside every box gets the nearest label and a fallback flag") {
    // Hand-written box definitions with a gap between them.
    write_file(wd.path / "gap_defs.json", R"({
      "mode": "box",
      "catalog": [{"id":"avg_sentence_length","kind":"syntactic","value_type":"numeric"}],
      "definitions": [
        {"label":"A1","constraints":[{"descriptor":"avg_sentence_length",
          "lower":"unbounded","lower_inclusive":false,"upper":2.0,"upper_inclusive":true}]},
        {"label":"C2","constraints":[{"descriptor":"avg_sentence_length",
          "lower":100.0,"lower_inclusive":false,"upper":"unbounded","upper_inclusive":true}]}
      ]
    })");
    write_file(wd.path / "one.txt", "The cat sat on the mat.\n");
    const CliResult r =
        run_cli(wd, "classify --defs gap_defs.json --in one.txt --out gap_out.jsonl");
    CHECK(r.exit_code == 0);
    const auto j = nlohmann::json::parse(slurp(wd.path / "gap_out.jsonl"));
    CHECK(j.at("label").get<std::string>() == "A1");
    CHECK(j.at("diagnostics").at("fallback").get<bool>());
  }

  SUBCASE("empty input stream: empty output, exit 0") {
    write_file(wd.path / "empty.txt", "");
    const CliResult r = run_cli(wd, "classify --tree run/tree.json --in empty.txt --out out.jsonl");
    CHECK(r.exit_code == 0);
    CHECK(slurp(wd.path / "out.jsonl").empty());
  }

  SUBCASE("evaluate a corpus against the tree") {
    const CliResult r =
        run_cli(wd, "evaluate --corpus fix.csv --tree run/tree.json --out eval_run");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("accuracy=") != std::string::npos);
    const auto report =
        nlohmann::json::parse(slurp(wd.path / "eval_run" / "eval_report.json"));
    CHECK(report.at("n").get<int>() == 240);
    CHECK(report.at("accuracy").get<double>() >= 0.9);
  }

  SUBCASE("evaluate reports agreement when every row is dual-annotated") {
    write_file(wd.path / "dual.csv",
               "text,label,label2\nThe cat sat on the mat.,A1,A2\nDogs bark at night.,B1,B1\n");
    const CliResult r = run_cli(wd, "evaluate --corpus dual.csv --tree run/tree.json --out dual");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("inter-annotator agreement=0.5") != std::string::npos);
  }

  SUBCASE("evaluate via exact defs matches evaluate via the tree") {
    REQUIRE(run_cli(wd, "ontology --tree run/tree.json --mode exact --out run").exit_code == 0);
    REQUIRE(run_cli(wd, "evaluate --corpus fix.csv --tree run/tree.json --out by_tree")
                .exit_code == 0);
    REQUIRE(run_cli(wd, "evaluate --corpus fix.csv --defs run/defs.json --out by_defs")
                .exit_code == 0);
    CHECK(slurp(wd.path / "by_tree" / "eval_report.json") ==
          slurp(wd.path / "by_defs" / "eval_report.json"));
  }
}
