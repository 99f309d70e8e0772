#include "leveldef/rules.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "leveldef/error.hpp"

namespace leveldef {

// ---------------------------------------------------------------------------
// Interval arithmetic
// ---------------------------------------------------------------------------

bool IntervalConstraint::contains(double x) const {
  if (lower && !(lower_inclusive ? x >= *lower : x > *lower)) return false;
  if (upper && !(upper_inclusive ? x <= *upper : x < *upper)) return false;
  return true;
}

bool IntervalConstraint::is_empty() const {
  if (!lower || !upper) return false;
  if (*lower > *upper) return true;
  return *lower == *upper && !(lower_inclusive && upper_inclusive);
}

IntervalConstraint intersect(const IntervalConstraint& a, const IntervalConstraint& b) {
  IntervalConstraint out;
  out.descriptor_id = a.descriptor_id;
  if (a.lower && b.lower) {
    if (*a.lower > *b.lower) {
      out.lower = a.lower;
      out.lower_inclusive = a.lower_inclusive;
    } else if (*b.lower > *a.lower) {
      out.lower = b.lower;
      out.lower_inclusive = b.lower_inclusive;
    } else {
      out.lower = a.lower;
      out.lower_inclusive = a.lower_inclusive && b.lower_inclusive;
    }
  } else {
    out.lower = a.lower ? a.lower : b.lower;
    out.lower_inclusive = a.lower ? a.lower_inclusive : b.lower_inclusive;
  }
  if (a.upper && b.upper) {
    if (*a.upper < *b.upper) {
      out.upper = a.upper;
      out.upper_inclusive = a.upper_inclusive;
    } else if (*b.upper < *a.upper) {
      out.upper = b.upper;
      out.upper_inclusive = b.upper_inclusive;
    } else {
      out.upper = a.upper;
      out.upper_inclusive = a.upper_inclusive && b.upper_inclusive;
    }
  } else {
    out.upper = a.upper ? a.upper : b.upper;
    out.upper_inclusive = a.upper ? a.upper_inclusive : b.upper_inclusive;
  }
  return out;
}

IntervalConstraint hull(const IntervalConstraint& a, const IntervalConstraint& b) {
  IntervalConstraint out;
  out.descriptor_id = a.descriptor_id;
  if (a.lower && b.lower) {
    if (*a.lower < *b.lower) {
      out.lower = a.lower;
      out.lower_inclusive = a.lower_inclusive;
    } else if (*b.lower < *a.lower) {
      out.lower = b.lower;
      out.lower_inclusive = b.lower_inclusive;
    } else {
      out.lower = a.lower;
      out.lower_inclusive = a.lower_inclusive || b.lower_inclusive;
    }
  }
  if (a.upper && b.upper) {
    if (*a.upper > *b.upper) {
      out.upper = a.upper;
      out.upper_inclusive = a.upper_inclusive;
    } else if (*b.upper > *a.upper) {
      out.upper = b.upper;
      out.upper_inclusive = b.upper_inclusive;
    } else {
      out.upper = a.upper;
      out.upper_inclusive = a.upper_inclusive || b.upper_inclusive;
    }
  }
  return out;
}

bool intervals_overlap(const IntervalConstraint& a, const IntervalConstraint& b) {
  if (a.is_empty() || b.is_empty()) return false;
  return !intersect(a, b).is_empty();
}

bool PathRule::matches(const FeatureVector& fv, const FeatureCatalog& catalog) const {
  for (const IntervalConstraint& c : constraints) {
    const std::size_t j = catalog.index_of(c.descriptor_id);
    if (j == FeatureCatalog::npos) {
      throw Error(Errc::unknown_property, "constraint on unknown descriptor: " + c.descriptor_id);
    }
    if (!c.contains(fv[j])) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Definitions
// ---------------------------------------------------------------------------

DefinitionMode parse_definition_mode(std::string_view name) {
  if (name == "exact") return DefinitionMode::exact;
  if (name == "box") return DefinitionMode::box;
  throw Error(Errc::parse, "unknown definition mode: '" + std::string(name) + "'");
}

const char* to_string(DefinitionMode mode) {
  return mode == DefinitionMode::exact ? "exact" : "box";
}

bool ClassDefinition::empty() const {
  if (mode == DefinitionMode::box) return constraints.empty();
  if (paths.empty()) return true;
  for (const PathRule& p : paths) {
    if (!p.constraints.empty()) return false;
  }
  return true;
}

const ClassDefinition* DefinitionSet::find(Level label) const {
  for (const ClassDefinition& d : definitions) {
    if (d.label == label) return &d;
  }
  return nullptr;
}

std::vector<PathRule> extract_paths(const DecisionTree& tree) {
  std::vector<PathRule> paths;
  // One slot per feature; constraints on the same descriptor along a path are
  // intersected, which keeps only the tightest bounds.
  std::vector<std::optional<IntervalConstraint>> active(tree.catalog.size());

  auto descend = [&](auto&& self, int idx) -> void {
    const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
    if (node.is_leaf()) {
      PathRule rule;
      for (const auto& slot : active) {
        if (slot) rule.constraints.push_back(*slot);
      }
      rule.label = node.majority;
      rule.support = node.total();
      rule.purity = node.total() > 0
                        ? static_cast<double>(node.counts[ordinal(node.majority)]) /
                              static_cast<double>(node.total())
                        : 1.0;
      paths.push_back(std::move(rule));
      return;
    }
    const auto j = static_cast<std::size_t>(node.feature);
    const std::string& id = tree.catalog.descriptors[j].id;
    const auto saved = active[j];

    IntervalConstraint left_c{id, std::nullopt, false, node.threshold, true};
    active[j] = saved ? intersect(*saved, left_c) : left_c;
    self(self, node.left);

    IntervalConstraint right_c{id, node.threshold, false, std::nullopt, true};
    active[j] = saved ? intersect(*saved, right_c) : right_c;
    self(self, node.right);

    active[j] = saved;
  };
  descend(descend, 0);
  return paths;
}

std::vector<IntervalConstraint> class_ranges(const std::vector<PathRule>& paths, Level label,
                                             const FeatureCatalog& catalog) {
  std::vector<const PathRule*> own;
  for (const PathRule& p : paths) {
    if (p.label == label) own.push_back(&p);
  }
  if (own.empty()) {
    throw Error(Errc::no_paths_for_label,
                std::string("no paths predict label ") + level_name(label));
  }
  std::vector<IntervalConstraint> ranges;
  for (const FeatureDescriptor& d : catalog.descriptors) {
    std::optional<IntervalConstraint> acc;
    bool in_all = true;
    for (const PathRule* p : own) {
      const IntervalConstraint* found = nullptr;
      for (const IntervalConstraint& c : p->constraints) {
        if (c.descriptor_id == d.id) {
          found = &c;
          break;
        }
      }
      if (!found) {
        // A path without the constraint projects to the full axis: the
        // bounding interval carries no information, drop the descriptor.
        in_all = false;
        break;
      }
      acc = acc ? hull(*acc, *found) : *found;
    }
    if (in_all && acc && (acc->lower || acc->upper)) {
      ranges.push_back(*acc);
    }
  }
  return ranges;
}

DefinitionSet build_definitions(const DecisionTree& tree, const ImportanceReport& importance,
                                DefinitionMode mode) {
  const auto paths = extract_paths(tree);
  DefinitionSet defs;
  defs.mode = mode;
  defs.catalog = tree.catalog;
  defs.config = tree.config;
  defs.tree_hash = tree_fingerprint(tree);
  for (Level l : kAllLevels) {
    bool observed = false;
    for (const PathRule& p : paths) {
      if (p.label == l) observed = true;
    }
    if (!observed) continue;
    ClassDefinition def;
    def.label = l;
    def.mode = mode;
    if (mode == DefinitionMode::exact) {
      for (const PathRule& p : paths) {
        if (p.label == l) def.paths.push_back(p);
      }
    } else {
      for (IntervalConstraint& c : class_ranges(paths, l, tree.catalog)) {
        if (!importance.is_excluded(c.descriptor_id)) {
          def.constraints.push_back(std::move(c));
        }
      }
    }
    defs.definitions.push_back(std::move(def));
  }
  return defs;
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

namespace {

double box_distance(const std::vector<IntervalConstraint>& constraints, const FeatureVector& fv,
                    const FeatureCatalog& catalog) {
  double dist = 0.0;  // L-infinity over violated dimensions
  for (const IntervalConstraint& c : constraints) {
    const std::size_t j = catalog.index_of(c.descriptor_id);
    if (j == FeatureCatalog::npos) {
      throw Error(Errc::unknown_property, "constraint on unknown descriptor: " + c.descriptor_id);
    }
    const double x = fv[j];
    double d = 0.0;
    if (c.lower && x < *c.lower) d = *c.lower - x;
    if (c.upper && x > *c.upper) d = x - *c.upper;
    dist = std::max(dist, d);
  }
  return dist;
}

double bounded_volume(const std::vector<IntervalConstraint>& constraints) {
  double volume = 1.0;
  bool any_bounded = false;
  for (const IntervalConstraint& c : constraints) {
    if (c.bounded()) {
      any_bounded = true;
      volume *= *c.upper - *c.lower;
    }
  }
  return any_bounded ? volume : std::numeric_limits<double>::infinity();
}

void require_aligned(const DefinitionSet& defs, const FeatureVector& fv) {
  if (fv.size() != defs.catalog.size()) {
    throw Error(Errc::dimension_mismatch,
                "classify: vector length " + std::to_string(fv.size()) + " != catalog size " +
                    std::to_string(defs.catalog.size()));
  }
}

}  // namespace

std::pair<Level, MatchDiagnostics> classify_by_rules(const DefinitionSet& defs,
                                                     const FeatureVector& fv) {
  require_aligned(defs, fv);
  MatchDiagnostics diag;

  if (defs.mode == DefinitionMode::exact) {
    for (const ClassDefinition& def : defs.definitions) {
      for (const PathRule& p : def.paths) {
        if (p.matches(fv, defs.catalog)) diag.candidates.push_back(def.label);
      }
    }
    if (diag.candidates.size() == 1) {
      return {diag.candidates.front(), diag};
    }
    if (diag.candidates.size() > 1) {
      diag.ambiguous = true;  // impossible for tree-derived paths
      return {diag.candidates.front(), diag};
    }
    // Nothing matched: nearest leaf box.
    diag.fallback = true;
    Level best = Level::A1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (const ClassDefinition& def : defs.definitions) {
      for (const PathRule& p : def.paths) {
        const double d = box_distance(p.constraints, fv, defs.catalog);
        if (d < best_dist) {
          best_dist = d;
          best = def.label;
        }
      }
    }
    return {best, diag};
  }

  // Box mode.
  std::vector<const ClassDefinition*> matched;
  for (const ClassDefinition& def : defs.definitions) {
    bool ok = true;
    for (const IntervalConstraint& c : def.constraints) {
      const std::size_t j = defs.catalog.index_of(c.descriptor_id);
      if (j == FeatureCatalog::npos) {
        throw Error(Errc::unknown_property,
                    "constraint on unknown descriptor: " + c.descriptor_id);
      }
      if (!c.contains(fv[j])) {
        ok = false;
        break;
      }
    }
    if (ok) {
      matched.push_back(&def);
      diag.candidates.push_back(def.label);
    }
  }
  if (matched.size() == 1) {
    return {matched.front()->label, diag};
  }
  if (matched.size() > 1) {
    diag.ambiguous = true;
    const ClassDefinition* best = matched.front();
    double best_volume = bounded_volume(best->constraints);
    for (std::size_t i = 1; i < matched.size(); ++i) {
      const double v = bounded_volume(matched[i]->constraints);
      if (v < best_volume) {  // ties keep the earlier (lower-ordinal) match
        best_volume = v;
        best = matched[i];
      }
    }
    return {best->label, diag};
  }
  diag.fallback = true;
  Level best = Level::A1;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const ClassDefinition& def : defs.definitions) {
    const double d = box_distance(def.constraints, fv, defs.catalog);
    if (d < best_dist) {
      best_dist = d;
      best = def.label;
    }
  }
  return {best, diag};
}

// ---------------------------------------------------------------------------
// Consistency
// ---------------------------------------------------------------------------

namespace {

// True when the two constraint boxes share at least one point.
bool boxes_overlap(const std::vector<IntervalConstraint>& a,
                   const std::vector<IntervalConstraint>& b,
                   std::vector<IntervalConstraint>* region) {
  for (const IntervalConstraint& ca : a) {
    if (ca.is_empty()) return false;
    for (const IntervalConstraint& cb : b) {
      if (ca.descriptor_id != cb.descriptor_id) continue;
      if (!intervals_overlap(ca, cb)) return false;
      if (region) region->push_back(intersect(ca, cb));
    }
  }
  for (const IntervalConstraint& cb : b) {
    if (cb.is_empty()) return false;
  }
  return true;
}

}  // namespace

ConsistencyReport check_consistency(const DefinitionSet& defs) {
  ConsistencyReport report;
  for (const ClassDefinition& def : defs.definitions) {
    bool empty_interval = false;
    const auto scan = [&](const std::vector<IntervalConstraint>& cs) {
      for (const IntervalConstraint& c : cs) {
        if (c.is_empty()) empty_interval = true;
      }
    };
    scan(def.constraints);
    for (const PathRule& p : def.paths) scan(p.constraints);
    if (empty_interval) report.empty_definitions.push_back(def.label);
    if (def.empty()) report.vacuous_definitions.push_back(def.label);
  }

  if (defs.mode == DefinitionMode::box) {
    for (std::size_t i = 0; i < defs.definitions.size(); ++i) {
      for (std::size_t k = i + 1; k < defs.definitions.size(); ++k) {
        OverlapFinding finding;
        finding.a = defs.definitions[i].label;
        finding.b = defs.definitions[k].label;
        if (boxes_overlap(defs.definitions[i].constraints, defs.definitions[k].constraints,
                          &finding.region)) {
          report.overlaps.push_back(std::move(finding));
        }
      }
    }
    return report;
  }

  // Exact mode: leaf boxes must partition feature space.
  report.partition_checked = true;
  std::vector<const PathRule*> all_paths;
  for (const ClassDefinition& def : defs.definitions) {
    for (const PathRule& p : def.paths) all_paths.push_back(&p);
  }
  for (std::size_t i = 0; i < all_paths.size() && report.pairwise_disjoint; ++i) {
    for (std::size_t k = i + 1; k < all_paths.size(); ++k) {
      if (boxes_overlap(all_paths[i]->constraints, all_paths[k]->constraints, nullptr)) {
        report.pairwise_disjoint = false;
        break;
      }
    }
  }
  // Coverage by seeded sampling over a domain padded past every bound.
  std::vector<double> lo(defs.catalog.size(), 0.0), hi(defs.catalog.size(), 1.0);
  for (const PathRule* p : all_paths) {
    for (const IntervalConstraint& c : p->constraints) {
      const std::size_t j = defs.catalog.index_of(c.descriptor_id);
      if (c.lower) {
        lo[j] = std::min(lo[j], *c.lower - 1.0);
        hi[j] = std::max(hi[j], *c.lower + 1.0);
      }
      if (c.upper) {
        lo[j] = std::min(lo[j], *c.upper - 1.0);
        hi[j] = std::max(hi[j], *c.upper + 1.0);
      }
    }
  }
  std::mt19937_64 gen(0xC0FFEE);
  constexpr std::size_t kSamples = 2048;
  report.coverage_samples = kSamples;
  FeatureVector fv;
  fv.values.resize(defs.catalog.size());
  for (std::size_t s = 0; s < kSamples; ++s) {
    for (std::size_t j = 0; j < defs.catalog.size(); ++j) {
      const double u =
          static_cast<double>(gen() >> 11) / static_cast<double>(std::uint64_t{1} << 53);
      fv.values[j] = lo[j] + u * (hi[j] - lo[j]);
    }
    std::size_t hits = 0;
    for (const PathRule* p : all_paths) {
      if (p->matches(fv, defs.catalog)) ++hits;
    }
    if (hits != 1) {
      report.covers_space = false;
      if (hits > 1) report.pairwise_disjoint = false;
      break;
    }
  }
  return report;
}

ConsistencyReport check_consistency(const DefinitionSet& defs, const FeatureMatrix& matrix) {
  ConsistencyReport report = check_consistency(defs);
  for (const ClassDefinition& def : defs.definitions) {
    ConsistencyReport::DataRange dr;
    dr.label = def.label;
    bool any = false;
    for (std::size_t j = 0; j < matrix.m(); ++j) {
      double mn = std::numeric_limits<double>::infinity();
      double mx = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < matrix.n(); ++i) {
        if (matrix.labels[i] != def.label) continue;
        mn = std::min(mn, matrix.rows[i][j]);
        mx = std::max(mx, matrix.rows[i][j]);
        any = true;
      }
      if (mn <= mx) {
        dr.ranges.push_back({matrix.catalog.descriptors[j].id, mn, true, mx, true});
      }
    }
    if (any) report.data_ranges.push_back(std::move(dr));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json constraint_to_json(const IntervalConstraint& c) {
  nlohmann::ordered_json j;
  j["descriptor"] = c.descriptor_id;
  if (c.lower) {
    j["lower"] = *c.lower;
  } else {
    j["lower"] = "unbounded";
  }
  j["lower_inclusive"] = c.lower_inclusive;
  if (c.upper) {
    j["upper"] = *c.upper;
  } else {
    j["upper"] = "unbounded";
  }
  j["upper_inclusive"] = c.upper_inclusive;
  return j;
}

IntervalConstraint constraint_from_json(const nlohmann::json& j) {
  IntervalConstraint c;
  c.descriptor_id = j.at("descriptor").get<std::string>();
  if (j.at("lower").is_number()) c.lower = j.at("lower").get<double>();
  c.lower_inclusive = j.at("lower_inclusive").get<bool>();
  if (j.at("upper").is_number()) c.upper = j.at("upper").get<double>();
  c.upper_inclusive = j.at("upper_inclusive").get<bool>();
  return c;
}

}  // namespace

std::string definitions_to_json(const DefinitionSet& defs) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(defs.mode);
  j["catalog"] = nlohmann::ordered_json::parse(catalog_to_json(defs.catalog));
  j["provenance"] = {{"tree_hash", defs.tree_hash},
                     {"config",
                      {{"max_depth", defs.config.max_depth},
                       {"min_samples_branch", defs.config.min_samples_branch},
                       {"min_samples_leaf", defs.config.leaf_min()},
                       {"importance_threshold", defs.config.importance_threshold}}}};
  nlohmann::ordered_json definitions = nlohmann::ordered_json::array();
  for (const ClassDefinition& def : defs.definitions) {
    nlohmann::ordered_json dj;
    dj["label"] = level_name(def.label);
    if (defs.mode == DefinitionMode::box) {
      nlohmann::ordered_json cs = nlohmann::ordered_json::array();
      for (const IntervalConstraint& c : def.constraints) cs.push_back(constraint_to_json(c));
      dj["constraints"] = std::move(cs);
    } else {
      nlohmann::ordered_json paths = nlohmann::ordered_json::array();
      for (const PathRule& p : def.paths) {
        nlohmann::ordered_json pj;
        nlohmann::ordered_json cs = nlohmann::ordered_json::array();
        for (const IntervalConstraint& c : p.constraints) cs.push_back(constraint_to_json(c));
        pj["constraints"] = std::move(cs);
        pj["support"] = p.support;
        pj["purity"] = p.purity;
        paths.push_back(std::move(pj));
      }
      dj["paths"] = std::move(paths);
    }
    definitions.push_back(std::move(dj));
  }
  j["definitions"] = std::move(definitions);
  return j.dump(2) + "\n";
}

DefinitionSet definitions_from_json(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("definitions: ") + e.what());
  }
  DefinitionSet defs;
  try {
    defs.mode = parse_definition_mode(j.at("mode").get<std::string>());
    defs.catalog = parse_catalog(j.at("catalog").dump());
    if (j.contains("provenance")) {
      const auto& p = j.at("provenance");
      defs.tree_hash = p.value("tree_hash", "");
      if (p.contains("config")) {
        const auto& c = p.at("config");
        defs.config.max_depth = c.value("max_depth", 5);
        defs.config.min_samples_branch = c.value("min_samples_branch", 50);
        defs.config.min_samples_leaf = c.value("min_samples_leaf", defs.config.min_samples_branch);
        defs.config.importance_threshold = c.value("importance_threshold", 0.01);
      }
    }
    for (const auto& dj : j.at("definitions")) {
      ClassDefinition def;
      def.label = parse_level(dj.at("label").get<std::string>());
      def.mode = defs.mode;
      if (defs.mode == DefinitionMode::box) {
        for (const auto& cj : dj.at("constraints")) {
          def.constraints.push_back(constraint_from_json(cj));
        }
      } else {
        for (const auto& pj : dj.at("paths")) {
          PathRule rule;
          rule.label = def.label;
          for (const auto& cj : pj.at("constraints")) {
            rule.constraints.push_back(constraint_from_json(cj));
          }
          rule.support = pj.value("support", std::int64_t{0});
          rule.purity = pj.value("purity", 1.0);
          def.paths.push_back(std::move(rule));
        }
      }
      defs.definitions.push_back(std::move(def));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("definitions: ") + e.what());
  }
  return defs;
}

void save_definitions(const DefinitionSet& defs, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write definitions: " + path);
  out << definitions_to_json(defs);
}

DefinitionSet load_definitions(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open definitions: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return definitions_from_json(ss.str());
}

std::string tree_fingerprint(const DecisionTree& tree) {
  const std::string text = tree_to_json(tree);
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

}  // namespace leveldef
