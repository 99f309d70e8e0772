#ifndef LEVELDEF_TEST_SUPPORT_HPP
#define LEVELDEF_TEST_SUPPORT_HPP

#include <random>
#include <vector>

#include "leveldef/corpus.hpp"
#include "leveldef/lexicon.hpp"

namespace test_support {

inline const leveldef::Lexicons& lexicons() {
  static const leveldef::Lexicons lex = leveldef::Lexicons::load(LEVELDEF_TEST_DATA_DIR);
  return lex;
}

inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) / static_cast<double>(std::uint64_t{1} << 53);
}

/// Bare catalog with m numeric features f0..f{m-1} for synthetic matrices.
inline leveldef::FeatureCatalog numeric_catalog(std::size_t m) {
  leveldef::FeatureCatalog catalog;
  for (std::size_t j = 0; j < m; ++j) {
    catalog.descriptors.push_back({"f" + std::to_string(j),
                                   leveldef::DescriptorKind::lexical,
                                   leveldef::ValueType::numeric});
  }
  return catalog;
}

/// Random matrix with labels loosely clustered along feature 0, so fitted
/// trees have real structure.
inline leveldef::FeatureMatrix random_matrix(std::mt19937_64& gen, std::size_t n, std::size_t m,
                                             int classes) {
  leveldef::FeatureMatrix matrix;
  matrix.catalog = numeric_catalog(m);
  for (std::size_t i = 0; i < n; ++i) {
    leveldef::FeatureVector fv;
    for (std::size_t j = 0; j < m; ++j) fv.values.push_back(uniform01(gen) * 10.0);
    int label = static_cast<int>(fv.values[0] / (10.0 / classes));
    if (uniform01(gen) < 0.2) label = static_cast<int>(gen() % classes);
    if (label >= classes) label = classes - 1;
    matrix.rows.push_back(std::move(fv));
    matrix.labels.push_back(static_cast<leveldef::Level>(label));
  }
  return matrix;
}

}  // namespace test_support

#endif
