#ifndef LEVELDEF_MANCHESTER_HPP
#define LEVELDEF_MANCHESTER_HPP

#include <map>
#include <string>
#include <vector>

#include "leveldef/rules.hpp"

namespace leveldef {

/// snake_case descriptor id -> camelCase data property name and back.
std::string property_name(std::string_view descriptor_id);

/// Decimal rendering used in facets: fixed, at most six fractional digits,
/// trailing zeros trimmed; falls back to the shortest round-trip form when six
/// digits would not parse back to the same double.
std::string format_decimal(double value);

inline constexpr const char* kDefaultOntologyIri = "https://example.org/conv-onto#";

/// Manchester class expression for one definition, e.g.
///   Utterance and (fleschKincaid some xsd:decimal[> 4.2 , <= 8.7])
/// Binary descriptors render as `(p value true)` / `(p value false)`; exact
/// definitions with several paths become `Utterance and ((..) or (..))`.
/// Throws Errc::empty_definition on an empty body.
std::string emit_class_expression(const ClassDefinition& def, const FeatureCatalog& catalog);

struct OntologyDoc {
  std::string iri;
  std::vector<std::pair<std::string, std::string>> data_properties;  // name, range
  std::map<Level, std::string> expressions;
  std::string text;  // full .omn document, byte-deterministic
};

/// Full Manchester document: prefix block, data property declarations for
/// every referenced descriptor, `Class: Utterance`, one `<Label>LevelUtterance`
/// frame per definition, and a DisjointClasses axiom over the level classes.
/// Throws Errc::empty_set when no definition is present and
/// Errc::empty_definition when any body is empty.
OntologyDoc emit_ontology(const DefinitionSet& defs, const std::string& iri = kDefaultOntologyIri);

void save_ontology(const OntologyDoc& doc, const std::string& path);

/// Parses the subset emitted above back into a ClassDefinition. The expression
/// text carries no class name, so the label is supplied by the caller (it
/// comes from the enclosing Class frame). Conjunctions of atoms parse as box
/// mode; a top-level disjunction parses as exact mode. Throws Errc::syntax
/// with a byte position and Errc::unknown_property for properties outside the
/// catalog.
ClassDefinition parse_class_expression(const std::string& text, const FeatureCatalog& catalog,
                                       Level label = Level::A1);

/// Round-trip comparison: constraints, bounds and inclusivity per path, with a
/// single-path exact definition considered equal to the same-body box
/// definition. PathRule support/purity are not serialized and are ignored.
bool structurally_equal(const ClassDefinition& a, const ClassDefinition& b);

}  // namespace leveldef

#endif
