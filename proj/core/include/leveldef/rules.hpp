#ifndef LEVELDEF_RULES_HPP
#define LEVELDEF_RULES_HPP

#include <optional>
#include <string>
#include <vector>

#include "leveldef/dtree.hpp"

namespace leveldef {

// ---------------------------------------------------------------------------
// Interval constraints and path rules
// ---------------------------------------------------------------------------

/// One-descriptor range. Tree splits produce half-open pieces: `> t` below
/// (exclusive) and `<= t` above (inclusive); absent bounds are unbounded.
struct IntervalConstraint {
  std::string descriptor_id;
  std::optional<double> lower;
  bool lower_inclusive = false;
  std::optional<double> upper;
  bool upper_inclusive = true;

  bool contains(double x) const;
  /// Both bounds present and contradictory.
  bool is_empty() const;
  bool bounded() const { return lower.has_value() && upper.has_value(); }

  bool operator==(const IntervalConstraint&) const = default;
};

/// Intersection of two constraints on the same descriptor (tightest bounds).
IntervalConstraint intersect(const IntervalConstraint& a, const IntervalConstraint& b);

/// Bounding hull of two constraints on the same descriptor (loosest bounds,
/// unbounded sides win).
IntervalConstraint hull(const IntervalConstraint& a, const IntervalConstraint& b);

/// True when the two intervals share at least one point.
bool intervals_overlap(const IntervalConstraint& a, const IntervalConstraint& b);

/// One root-to-leaf box: at most one constraint per descriptor, in catalog
/// order.
struct PathRule {
  std::vector<IntervalConstraint> constraints;
  Level label = Level::A1;
  std::int64_t support = 0;  // training rows in the leaf
  double purity = 1.0;       // majority fraction in the leaf

  bool matches(const FeatureVector& fv, const FeatureCatalog& catalog) const;
};

// ---------------------------------------------------------------------------
// Class definitions
// ---------------------------------------------------------------------------

enum class DefinitionMode { exact, box };

DefinitionMode parse_definition_mode(std::string_view name);
const char* to_string(DefinitionMode mode);

/// exact: disjunction of the label's PathRules (tree-faithful).
/// box: single conjunction of per-descriptor bounding ranges.
struct ClassDefinition {
  Level label = Level::A1;
  DefinitionMode mode = DefinitionMode::box;
  std::vector<PathRule> paths;                  // exact mode
  std::vector<IntervalConstraint> constraints;  // box mode

  bool empty() const;
};

struct DefinitionSet {
  DefinitionMode mode = DefinitionMode::box;
  std::vector<ClassDefinition> definitions;  // ordinal order, observed labels only
  FeatureCatalog catalog;
  std::string tree_hash;  // provenance
  TrainConfig config;

  const ClassDefinition* find(Level label) const;
};

/// One PathRule per leaf, in left-to-right leaf order. Repeated constraints on
/// a descriptor along a path are merged into their intersection.
std::vector<PathRule> extract_paths(const DecisionTree& tree);

/// Bounding interval per descriptor over the label's paths. A descriptor left
/// unconstrained by any such path projects to the full axis and is omitted.
/// Throws Errc::no_paths_for_label.
std::vector<IntervalConstraint> class_ranges(const std::vector<PathRule>& paths,
                                             Level label,
                                             const FeatureCatalog& catalog);

/// Compiles the tree into per-label definitions. Box mode drops descriptors
/// flagged by the importance threshold; exact mode never drops anything.
DefinitionSet build_definitions(const DecisionTree& tree, const ImportanceReport& importance,
                                DefinitionMode mode);

struct MatchDiagnostics {
  std::vector<Level> candidates;  // definitions/paths that matched
  bool fallback = false;          // nearest-box assignment, nothing matched
  bool ambiguous = false;         // more than one match
};

/// Total, deterministic classification. Exact mode expects exactly one
/// matching path; box mode resolves multiple matches by smallest bounded
/// volume (ties to lowest ordinal) and zero matches by nearest box under the
/// L-infinity boundary distance.
std::pair<Level, MatchDiagnostics> classify_by_rules(const DefinitionSet& defs,
                                                     const FeatureVector& fv);

// ---------------------------------------------------------------------------
// Consistency checking
// ---------------------------------------------------------------------------

struct OverlapFinding {
  Level a;
  Level b;
  std::vector<IntervalConstraint> region;  // intersection on shared descriptors
};

struct ConsistencyReport {
  std::vector<OverlapFinding> overlaps;          // box-mode pairwise overlaps
  std::vector<Level> empty_definitions;          // contradictory intervals
  std::vector<Level> vacuous_definitions;        // zero constraints, match-all
  bool partition_checked = false;                // exact mode only
  bool pairwise_disjoint = true;
  bool covers_space = true;
  std::size_t coverage_samples = 0;

  /// Per-label observed data ranges (the min/max diagnostic); filled when a
  /// matrix is supplied.
  struct DataRange {
    Level label;
    std::vector<IntervalConstraint> ranges;  // [min, max] per descriptor
  };
  std::vector<DataRange> data_ranges;

  bool clean() const {
    return overlaps.empty() && empty_definitions.empty() && vacuous_definitions.empty() &&
           pairwise_disjoint && covers_space;
  }
};

ConsistencyReport check_consistency(const DefinitionSet& defs);
/// Also fills the per-label observed min/max ranges from training data.
ConsistencyReport check_consistency(const DefinitionSet& defs, const FeatureMatrix& matrix);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string definitions_to_json(const DefinitionSet& defs);
DefinitionSet definitions_from_json(const std::string& json_text);
void save_definitions(const DefinitionSet& defs, const std::string& path);
DefinitionSet load_definitions(const std::string& path);

/// FNV-1a over the canonical tree JSON; used for provenance.
std::string tree_fingerprint(const DecisionTree& tree);

}  // namespace leveldef

#endif
