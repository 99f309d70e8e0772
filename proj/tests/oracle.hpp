#ifndef LEVELDEF_TEST_ORACLE_HPP
#define LEVELDEF_TEST_ORACLE_HPP

// Brute-force split oracle, independent of the library's sweep: enumerates
// every (feature, midpoint) candidate and re-partitions the rows for each one.
// Candidate comparison uses the same exact-rational rule the contract
// documents (cross-multiplied integer scores), so (feature, threshold)
// identity is meaningful.

#include <algorithm>
#include <optional>
#include <vector>

#include "leveldef/corpus.hpp"

namespace test_oracle {

struct OracleSplit {
  std::size_t feature = 0;
  double threshold = 0.0;
  double decrease = 0.0;
};

inline double oracle_gini(const std::vector<std::int64_t>& counts) {
  std::int64_t total = 0;
  for (auto c : counts) total += c;
  double acc = 1.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    acc -= p * p;
  }
  return acc;
}

inline std::optional<OracleSplit> brute_force_best_split(const leveldef::FeatureMatrix& matrix,
                                                         const std::vector<std::size_t>& rows,
                                                         int min_leaf = 1) {
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  if (n < 2) return std::nullopt;

  std::vector<std::int64_t> parent(leveldef::kLevelCount, 0);
  for (std::size_t r : rows) parent[static_cast<std::size_t>(ordinal(matrix.labels[r]))]++;
  std::int64_t sq_parent = 0;
  for (auto c : parent) sq_parent += c * c;

  bool found = false;
  __int128 best_s = 0;
  std::int64_t best_nl = 1, best_nr = 1;
  OracleSplit best;
  std::vector<std::int64_t> left(leveldef::kLevelCount), right(leveldef::kLevelCount);

  for (std::size_t j = 0; j < matrix.m(); ++j) {
    std::vector<double> values;
    values.reserve(rows.size());
    for (std::size_t r : rows) values.push_back(matrix.rows[r].values[j]);
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t v = 0; v + 1 < values.size(); ++v) {
      double t = values[v] + (values[v + 1] - values[v]) / 2.0;
      if (!(t < values[v + 1])) t = values[v];
      std::fill(left.begin(), left.end(), 0);
      std::fill(right.begin(), right.end(), 0);
      for (std::size_t r : rows) {
        auto& side = matrix.rows[r].values[j] <= t ? left : right;
        side[static_cast<std::size_t>(ordinal(matrix.labels[r]))]++;
      }
      std::int64_t nl = 0, nr = 0, sq_l = 0, sq_r = 0;
      for (int k = 0; k < leveldef::kLevelCount; ++k) {
        nl += left[static_cast<std::size_t>(k)];
        nr += right[static_cast<std::size_t>(k)];
        sq_l += left[static_cast<std::size_t>(k)] * left[static_cast<std::size_t>(k)];
        sq_r += right[static_cast<std::size_t>(k)] * right[static_cast<std::size_t>(k)];
      }
      if (nl < min_leaf || nr < min_leaf) continue;
      const __int128 s = static_cast<__int128>(n) * nr * sq_l +
                         static_cast<__int128>(n) * nl * sq_r -
                         static_cast<__int128>(nl) * nr * sq_parent;
      if (s <= 0) continue;
      const bool better =
          !found || s * (static_cast<__int128>(best_nl) * best_nr) >
                        best_s * (static_cast<__int128>(nl) * nr);
      if (better) {
        found = true;
        best_s = s;
        best_nl = nl;
        best_nr = nr;
        best.feature = j;
        best.threshold = t;
        best.decrease = oracle_gini(parent) -
                        (static_cast<double>(nl) / static_cast<double>(n)) * oracle_gini(left) -
                        (static_cast<double>(nr) / static_cast<double>(n)) * oracle_gini(right);
      }
    }
  }
  if (!found) return std::nullopt;
  return best;
}

}  // namespace test_oracle

#endif
