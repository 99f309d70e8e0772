#include "leveldef/dtree.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leveldef/error.hpp"

namespace leveldef {

std::int64_t TreeNode::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::size_t DecisionTree::leaf_count() const {
  std::size_t leaves = 0;
  for (const TreeNode& n : nodes) {
    if (n.is_leaf()) ++leaves;
  }
  return leaves;
}

double gini_impurity(std::span<const std::int64_t> class_counts) {
  std::int64_t total = 0;
  for (std::int64_t c : class_counts) total += c;
  if (total <= 0) {
    throw Error(Errc::empty_node, "gini_impurity: zero total count");
  }
  double sum_sq = 0.0;
  for (std::int64_t c : class_counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

namespace {

Level majority_of(const ClassCounts& counts) {
  int best = 0;
  for (int k = 1; k < kLevelCount; ++k) {
    if (counts[k] > counts[best]) best = k;  // ties resolve to the lowest ordinal
  }
  return static_cast<Level>(best);
}

bool is_pure(const ClassCounts& counts) {
  int nonzero = 0;
  for (std::int64_t c : counts) {
    if (c > 0) ++nonzero;
  }
  return nonzero <= 1;
}

double weighted_decrease(const ClassCounts& parent, const ClassCounts& left,
                         const ClassCounts& right) {
  std::int64_t n = 0, nl = 0, nr = 0;
  for (int k = 0; k < kLevelCount; ++k) {
    n += parent[k];
    nl += left[k];
    nr += right[k];
  }
  const double dn = static_cast<double>(n);
  return gini_impurity(parent) -
         (static_cast<double>(nl) / dn) * gini_impurity(left) -
         (static_cast<double>(nr) / dn) * gini_impurity(right);
}

// Candidate thresholds are midpoints of consecutive distinct values. The
// midpoint may round up to the larger value when the two are adjacent
// doubles; fall back to the smaller value so `<= t` still separates them.
double midpoint(double a, double b) {
  double t = a + (b - a) / 2.0;
  if (!(t < b)) t = a;
  return t;
}

// Split quality is compared in exact integer arithmetic. For a node of size n
// with per-class count sums of squares sq_*,
//   decrease = S / (n^2 * nl * nr),  S = n*nr*sqL + n*nl*sqR - nl*nr*sqP,
// so candidates compare by S1*nl2*nr2 <=> S2*nl1*nr1 without rounding. Fits
// __int128 up to a few million samples per node.
struct ExactScore {
  __int128 s = 0;
  std::int64_t nl = 0;
  std::int64_t nr = 0;

  bool better_than(const ExactScore& other) const {
    const __int128 lhs = s * (static_cast<__int128>(other.nl) * other.nr);
    const __int128 rhs = other.s * (static_cast<__int128>(nl) * nr);
    return lhs > rhs;
  }
};

}  // namespace

std::optional<SplitCandidate> best_split(const FeatureMatrix& matrix,
                                         std::span<const std::size_t> rows, int min_leaf) {
  const std::int64_t n = static_cast<std::int64_t>(rows.size());
  if (n < 2) return std::nullopt;
  if (min_leaf < 1) min_leaf = 1;

  ClassCounts parent{};
  for (std::size_t r : rows) parent[ordinal(matrix.labels[r])]++;
  std::int64_t sq_parent = 0;
  for (std::int64_t c : parent) sq_parent += c * c;

  struct Best {
    ExactScore score;
    std::size_t feature = 0;
    double threshold = 0.0;
    ClassCounts left{}, right{};
    bool valid = false;
  } best;

  std::vector<std::pair<double, int>> column(rows.size());  // value, class ordinal
  for (std::size_t j = 0; j < matrix.m(); ++j) {
    for (std::size_t k = 0; k < rows.size(); ++k) {
      column[k] = {matrix.rows[rows[k]].values[j], ordinal(matrix.labels[rows[k]])};
    }
    std::sort(column.begin(), column.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    ClassCounts left{};
    std::int64_t sq_left = 0;
    std::int64_t sq_right = sq_parent;
    for (std::int64_t i = 0; i + 1 < n; ++i) {
      const int k = column[static_cast<std::size_t>(i)].second;
      sq_left += 2 * left[k] + 1;
      sq_right -= 2 * (parent[k] - left[k]) - 1;
      left[k]++;
      const double v = column[static_cast<std::size_t>(i)].first;
      const double next = column[static_cast<std::size_t>(i + 1)].first;
      if (!(next > v)) continue;  // candidates only between distinct values
      const std::int64_t nl = i + 1;
      const std::int64_t nr = n - nl;
      if (nl < min_leaf || nr < min_leaf) continue;
      ExactScore score{static_cast<__int128>(n) * nr * sq_left +
                           static_cast<__int128>(n) * nl * sq_right -
                           static_cast<__int128>(nl) * nr * sq_parent,
                       nl, nr};
      if (score.s <= 0) continue;  // decrease must be strictly positive
      if (!best.valid || score.better_than(best.score)) {
        best.valid = true;
        best.score = score;
        best.feature = j;
        best.threshold = midpoint(v, next);
        best.left = left;
        for (int c = 0; c < kLevelCount; ++c) best.right[c] = parent[c] - left[c];
      }
    }
  }
  if (!best.valid) return std::nullopt;
  return SplitCandidate{best.feature, best.threshold,
                        weighted_decrease(parent, best.left, best.right)};
}

DecisionTree fit(const FeatureMatrix& matrix, const TrainConfig& config) {
  if (matrix.rows.empty()) {
    throw Error(Errc::empty_matrix, "fit: empty feature matrix");
  }
  if (config.max_depth < 1 || config.min_samples_branch < 1 || config.leaf_min() < 1) {
    throw Error(Errc::parse, "fit: max_depth and sample minimums must be >= 1");
  }
  for (std::size_t i = 0; i < matrix.rows.size(); ++i) {
    if (matrix.rows[i].size() != matrix.m()) {
      throw Error(Errc::dimension_mismatch,
                  "fit: row " + std::to_string(i) + " has wrong length");
    }
    for (double v : matrix.rows[i].values) {
      if (!std::isfinite(v)) {
        throw Error(Errc::parse, "fit: non-finite feature value in row " + std::to_string(i));
      }
    }
  }

  DecisionTree tree;
  tree.catalog = matrix.catalog;
  tree.config = config;
  const int min_leaf = config.leaf_min();

  std::function<int(std::vector<std::size_t>&&, int)> build =
      [&](std::vector<std::size_t>&& rows, int depth) -> int {
    const int idx = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();
    ClassCounts counts{};
    for (std::size_t r : rows) counts[ordinal(matrix.labels[r])]++;
    tree.nodes[idx].counts = counts;
    tree.nodes[idx].majority = majority_of(counts);

    const auto total = static_cast<std::int64_t>(rows.size());
    if (depth >= config.max_depth || total < 2 * min_leaf || is_pure(counts)) {
      return idx;
    }
    const auto cand = best_split(matrix, rows, min_leaf);
    if (!cand) return idx;

    std::vector<std::size_t> left_rows, right_rows;
    left_rows.reserve(rows.size());
    for (std::size_t r : rows) {
      (matrix.rows[r].values[cand->feature] <= cand->threshold ? left_rows : right_rows)
          .push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree.nodes[idx].feature = static_cast<int>(cand->feature);
    tree.nodes[idx].threshold = cand->threshold;
    tree.nodes[idx].impurity_decrease = cand->impurity_decrease;
    const int left = build(std::move(left_rows), depth + 1);
    tree.nodes[idx].left = left;
    const int right = build(std::move(right_rows), depth + 1);
    tree.nodes[idx].right = right;
    return idx;
  };

  std::vector<std::size_t> all(matrix.rows.size());
  std::iota(all.begin(), all.end(), 0);
  build(std::move(all), 0);
  return tree;
}

std::size_t route_to_leaf(const DecisionTree& tree, const FeatureVector& fv) {
  if (fv.size() != tree.catalog.size()) {
    throw Error(Errc::dimension_mismatch,
                "predict: vector length " + std::to_string(fv.size()) + " != catalog size " +
                    std::to_string(tree.catalog.size()));
  }
  std::size_t idx = 0;
  while (!tree.nodes[idx].is_leaf()) {
    const TreeNode& node = tree.nodes[idx];
    idx = static_cast<std::size_t>(fv[static_cast<std::size_t>(node.feature)] <= node.threshold
                                       ? node.left
                                       : node.right);
  }
  return idx;
}

Level predict(const DecisionTree& tree, const FeatureVector& fv) {
  return tree.nodes[route_to_leaf(tree, fv)].majority;
}

// ---------------------------------------------------------------------------
// Importance
// ---------------------------------------------------------------------------

bool ImportanceReport::is_excluded(std::string_view descriptor_id) const {
  for (const ImportanceEntry& e : entries) {
    if (e.descriptor_id == descriptor_id) return e.excluded;
  }
  return false;
}

ImportanceReport feature_importance(const DecisionTree& tree) {
  const auto m = tree.catalog.size();
  std::vector<double> raw(m, 0.0);
  const double total = static_cast<double>(tree.root().total());
  bool any_split = false;
  for (const TreeNode& node : tree.nodes) {
    if (node.is_leaf()) continue;
    any_split = true;
    raw[static_cast<std::size_t>(node.feature)] +=
        (static_cast<double>(node.total()) / total) * node.impurity_decrease;
  }
  const double sum = std::accumulate(raw.begin(), raw.end(), 0.0);
  ImportanceReport report;
  report.no_splits = !any_split;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return raw[a] > raw[b]; });
  for (std::size_t j : order) {
    ImportanceEntry e;
    e.descriptor_id = tree.catalog.descriptors[j].id;
    e.importance = sum > 0.0 ? raw[j] / sum : raw[j];
    e.excluded = !report.no_splits && e.importance < tree.config.importance_threshold;
    report.entries.push_back(std::move(e));
  }
  return report;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json node_to_json(const DecisionTree& tree, int idx) {
  const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
  nlohmann::ordered_json j;
  if (node.is_leaf()) {
    j["kind"] = "leaf";
    nlohmann::ordered_json counts;
    for (Level l : kAllLevels) counts[level_name(l)] = node.counts[ordinal(l)];
    j["counts"] = std::move(counts);
    j["majority"] = level_name(node.majority);
  } else {
    j["kind"] = "split";
    j["feature_id"] = tree.catalog.descriptors[static_cast<std::size_t>(node.feature)].id;
    j["threshold"] = node.threshold;
    j["left"] = node_to_json(tree, node.left);
    j["right"] = node_to_json(tree, node.right);
  }
  return j;
}

// Rebuilds a node in preorder; counts and impurity_decrease of internal nodes
// are recomputed from the leaves.
int node_from_json(const nlohmann::json& j, DecisionTree& tree) {
  const int idx = static_cast<int>(tree.nodes.size());
  tree.nodes.emplace_back();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "leaf") {
    ClassCounts counts{};
    for (const auto& [name, value] : j.at("counts").items()) {
      counts[ordinal(parse_level(name))] = value.get<std::int64_t>();
    }
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
      if (c < 0) throw Error(Errc::parse, "tree: negative leaf count");
      total += c;
    }
    if (total < 1) throw Error(Errc::parse, "tree: leaf with empty counts");
    tree.nodes[idx].counts = counts;
    tree.nodes[idx].majority = parse_level(j.at("majority").get<std::string>());
    if (tree.nodes[idx].majority != majority_of(counts)) {
      throw Error(Errc::parse, "tree: majority label inconsistent with counts");
    }
    return idx;
  }
  if (kind != "split") {
    throw Error(Errc::parse, "tree: node kind must be 'leaf' or 'split'");
  }
  const std::string feature_id = j.at("feature_id").get<std::string>();
  const std::size_t feature = tree.catalog.index_of(feature_id);
  if (feature == FeatureCatalog::npos) {
    throw Error(Errc::parse, "tree: feature_id not in catalog: " + feature_id);
  }
  const double threshold = j.at("threshold").get<double>();
  if (!std::isfinite(threshold)) throw Error(Errc::parse, "tree: non-finite threshold");
  tree.nodes[idx].feature = static_cast<int>(feature);
  tree.nodes[idx].threshold = threshold;
  const int left = node_from_json(j.at("left"), tree);
  tree.nodes[idx].left = left;
  const int right = node_from_json(j.at("right"), tree);
  tree.nodes[idx].right = right;
  for (int k = 0; k < kLevelCount; ++k) {
    tree.nodes[idx].counts[k] =
        tree.nodes[left].counts[k] + tree.nodes[right].counts[k];
  }
  tree.nodes[idx].majority = majority_of(tree.nodes[idx].counts);
  tree.nodes[idx].impurity_decrease = weighted_decrease(
      tree.nodes[idx].counts, tree.nodes[left].counts, tree.nodes[right].counts);
  return idx;
}

}  // namespace

std::string tree_to_json(const DecisionTree& tree) {
  nlohmann::ordered_json j;
  j["catalog"] = nlohmann::ordered_json::parse(catalog_to_json(tree.catalog));
  j["config"] = {{"max_depth", tree.config.max_depth},
                 {"min_samples_branch", tree.config.min_samples_branch},
                 {"min_samples_leaf", tree.config.leaf_min()},
                 {"importance_threshold", tree.config.importance_threshold}};
  j["summary"] = {{"nodes", tree.node_count()}, {"leaves", tree.leaf_count()}};
  j["root"] = node_to_json(tree, 0);
  return j.dump(2) + "\n";
}

DecisionTree tree_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("tree: ") + e.what());
  }
  DecisionTree tree;
  try {
    tree.catalog = parse_catalog(j.at("catalog").dump());
    const auto& c = j.at("config");
    tree.config.max_depth = c.at("max_depth").get<int>();
    tree.config.min_samples_branch = c.at("min_samples_branch").get<int>();
    tree.config.min_samples_leaf = c.at("min_samples_leaf").get<int>();
    tree.config.importance_threshold = c.at("importance_threshold").get<double>();
    node_from_json(j.at("root"), tree);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("tree: ") + e.what());
  }
  return tree;
}

void save_tree(const DecisionTree& tree, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write tree: " + path);
  out << tree_to_json(tree);
}

DecisionTree load_tree(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open tree: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return tree_from_json(ss.str());
}

}  // namespace leveldef
