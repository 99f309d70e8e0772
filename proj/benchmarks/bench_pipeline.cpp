#include <benchmark/benchmark.h>

#include <random>

#include "leveldef/fixture.hpp"
#include "leveldef/manchester.hpp"

using namespace leveldef;

namespace {

const Lexicons& lexicons() {
  static const Lexicons lex = Lexicons::load(LEVELDEF_BENCH_DATA_DIR);
  return lex;
}

const LabeledCorpus& fixture() {
  static const LabeledCorpus corpus = generate_fixture_corpus({.texts_per_level = 50, .seed = 1});
  return corpus;
}

const FeatureMatrix& matrix() {
  static const FeatureMatrix m = build_matrix(fixture(), default_catalog(), lexicons());
  return m;
}

DecisionTree fitted() {
  TrainConfig config{.max_depth = 5, .min_samples_branch = 10};
  return fit(matrix(), config);
}

void BM_ExtractFeatures(benchmark::State& state) {
  const FeatureCatalog catalog = default_catalog();
  const std::string& text = fixture().items[200].text;
  for (auto _ : state) {
    benchmark::DoNotOptimize(extract_features(text, catalog, lexicons()));
  }
}
BENCHMARK(BM_ExtractFeatures);

void BM_Fit(benchmark::State& state) {
  TrainConfig config{.max_depth = 5, .min_samples_branch = 10};
  for (auto _ : state) {
    benchmark::DoNotOptimize(fit(matrix(), config));
  }
}
BENCHMARK(BM_Fit);

void BM_Predict(benchmark::State& state) {
  const DecisionTree tree = fitted();
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict(tree, matrix().rows[i++ % matrix().n()]));
  }
}
BENCHMARK(BM_Predict);

void BM_ClassifyByRules(benchmark::State& state) {
  const DecisionTree tree = fitted();
  const DefinitionSet defs =
      build_definitions(tree, feature_importance(tree), DefinitionMode::exact);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(classify_by_rules(defs, matrix().rows[i++ % matrix().n()]));
  }
}
BENCHMARK(BM_ClassifyByRules);

void BM_EmitOntology(benchmark::State& state) {
  const DecisionTree tree = fitted();
  const DefinitionSet defs =
      build_definitions(tree, feature_importance(tree), DefinitionMode::box);
  for (auto _ : state) {
    benchmark::DoNotOptimize(emit_ontology(defs));
  }
}
BENCHMARK(BM_EmitOntology);

}  // namespace

BENCHMARK_MAIN();
