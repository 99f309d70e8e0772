#ifndef LEVELDEF_DTREE_HPP
#define LEVELDEF_DTREE_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "leveldef/corpus.hpp"

namespace leveldef {

using ClassCounts = std::array<std::int64_t, kLevelCount>;

struct TrainConfig {
  int max_depth = 5;
  int min_samples_branch = 50;               // minimum size of each created child
  std::optional<int> min_samples_leaf;       // defaults to min_samples_branch
  double importance_threshold = 0.01;

  int leaf_min() const { return min_samples_leaf.value_or(min_samples_branch); }
};

/// Nodes live in DecisionTree::nodes in preorder; children are indices.
/// Leaves have left == right == -1.
struct TreeNode {
  int feature = -1;          // split feature index, -1 for leaves
  double threshold = 0.0;    // f[feature] <= threshold goes left
  int left = -1;
  int right = -1;
  ClassCounts counts{};      // training-label tallies reaching this node
  Level majority = Level::A1;
  double impurity_decrease = 0.0;  // weighted, local to this node; 0 for leaves

  bool is_leaf() const { return left < 0; }
  std::int64_t total() const;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  FeatureCatalog catalog;
  TrainConfig config;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t leaf_count() const;
  const TreeNode& root() const { return nodes.front(); }
};

struct SplitCandidate {
  std::size_t feature = 0;
  double threshold = 0.0;
  double impurity_decrease = 0.0;  // Gini decrease, weighted by child sizes
};

/// 1 - sum(p_k^2). Throws Errc::empty_node on a zero total.
double gini_impurity(std::span<const std::int64_t> class_counts);

/// Best (feature, midpoint) split of `rows` under the Gini criterion.
/// Candidates are midpoints between consecutive distinct values; ties break to
/// the lowest feature index, then the lowest threshold (decided in exact
/// integer arithmetic, so the order is bit-reproducible). Returns nullopt when
/// no candidate has a positive decrease or every candidate would create a
/// child smaller than `min_leaf`.
std::optional<SplitCandidate> best_split(const FeatureMatrix& matrix,
                                         std::span<const std::size_t> rows,
                                         int min_leaf = 1);

/// Greedy CART construction. A node becomes a leaf at max_depth, when pure,
/// when smaller than twice the per-leaf minimum, or when best_split yields
/// nothing. Throws Errc::empty_matrix on an empty matrix.
DecisionTree fit(const FeatureMatrix& matrix, const TrainConfig& config);

/// Routes through f[j] <= t. Throws Errc::dimension_mismatch on a wrong-length
/// vector. Majority ties in a leaf resolve to the lowest ordinal.
Level predict(const DecisionTree& tree, const FeatureVector& fv);

/// Leaf index the vector is routed to (for rule-consistency checks).
std::size_t route_to_leaf(const DecisionTree& tree, const FeatureVector& fv);

struct ImportanceEntry {
  std::string descriptor_id;
  double importance = 0.0;  // normalized over descriptors
  bool excluded = false;    // below config.importance_threshold
};

/// Entries sorted descending (ties by catalog order). `no_splits` marks the
/// degenerate all-zero report of a single-leaf tree, in which case nothing is
/// flagged and values stay unnormalized.
struct ImportanceReport {
  std::vector<ImportanceEntry> entries;
  bool no_splits = false;

  bool is_excluded(std::string_view descriptor_id) const;
};

/// importance(j) = sum over nodes splitting on j of (n_node/N) * decrease,
/// normalized to sum 1.
ImportanceReport feature_importance(const DecisionTree& tree);

/// JSON round-trip per the documented schema: catalog + config + nested node
/// records; internal counts are recomputed from leaf counts on load.
std::string tree_to_json(const DecisionTree& tree);
DecisionTree tree_from_json(const std::string& json_text);
void save_tree(const DecisionTree& tree, const std::string& path);
DecisionTree load_tree(const std::string& path);

}  // namespace leveldef

#endif
