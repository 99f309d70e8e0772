#include "leveldef/manchester.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "leveldef/error.hpp"

namespace leveldef {

std::string property_name(std::string_view descriptor_id) {
  std::string out;
  bool upper_next = false;
  for (char c : descriptor_id) {
    if (c == '_') {
      upper_next = true;
    } else if (upper_next) {
      out += (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
      upper_next = false;
    } else {
      out += c;
    }
  }
  return out;
}

std::string format_decimal(double value) {
  char buf[512];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  std::string fixed(buf);
  while (!fixed.empty() && fixed.back() == '0') fixed.pop_back();
  if (!fixed.empty() && fixed.back() == '.') fixed.pop_back();
  if (fixed == "-0") fixed = "0";
  if (std::strtod(fixed.c_str(), nullptr) == value) return fixed;
  // Six digits would lose the value; use the shortest fixed form that
  // round-trips (exponents are not valid xsd:decimal lexical forms).
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
  if (ec != std::errc{}) {
    throw Error(Errc::syntax, "cannot format decimal value");
  }
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Emission
// ---------------------------------------------------------------------------

namespace {

bool is_binary(const FeatureCatalog& catalog, const std::string& id) {
  const std::size_t j = catalog.index_of(id);
  return j != FeatureCatalog::npos && catalog.descriptors[j].value_type == ValueType::binary;
}

std::string atom_text(const IntervalConstraint& c, const FeatureCatalog& catalog) {
  const std::string prop = property_name(c.descriptor_id);
  if (is_binary(catalog, c.descriptor_id)) {
    const bool has_true = c.contains(1.0);
    const bool has_false = c.contains(0.0);
    if (has_true == has_false) {
      throw Error(Errc::empty_definition,
                  "binary constraint on " + c.descriptor_id + " does not select a single value");
    }
    return "(" + prop + (has_true ? " value true)" : " value false)");
  }
  std::string facets;
  if (c.lower) {
    facets += (c.lower_inclusive ? ">= " : "> ") + format_decimal(*c.lower);
  }
  if (c.upper) {
    if (!facets.empty()) facets += " , ";
    facets += (c.upper_inclusive ? "<= " : "< ") + format_decimal(*c.upper);
  }
  if (facets.empty()) {
    throw Error(Errc::empty_definition, "constraint on " + c.descriptor_id + " has no bounds");
  }
  return "(" + prop + " some xsd:decimal[" + facets + "])";
}

std::vector<IntervalConstraint> catalog_ordered(std::vector<IntervalConstraint> cs,
                                                const FeatureCatalog& catalog) {
  std::stable_sort(cs.begin(), cs.end(),
                   [&](const IntervalConstraint& a, const IntervalConstraint& b) {
                     return catalog.index_of(a.descriptor_id) < catalog.index_of(b.descriptor_id);
                   });
  return cs;
}

std::string conjunction_text(const std::vector<IntervalConstraint>& cs,
                             const FeatureCatalog& catalog) {
  std::string out;
  for (const IntervalConstraint& c : catalog_ordered(cs, catalog)) {
    if (!out.empty()) out += " and ";
    out += atom_text(c, catalog);
  }
  return out;
}

}  // namespace

std::string emit_class_expression(const ClassDefinition& def, const FeatureCatalog& catalog) {
  if (def.empty()) {
    throw Error(Errc::empty_definition,
                std::string("definition of ") + level_name(def.label) + " is empty");
  }
  if (def.mode == DefinitionMode::box) {
    return "Utterance and " + conjunction_text(def.constraints, catalog);
  }
  if (def.paths.size() == 1) {
    return "Utterance and " + conjunction_text(def.paths.front().constraints, catalog);
  }
  std::string body;
  for (const PathRule& p : def.paths) {
    if (p.constraints.empty()) {
      throw Error(Errc::empty_definition,
                  std::string("path of ") + level_name(def.label) + " has no constraints");
    }
    if (!body.empty()) body += " or ";
    const std::string conj = conjunction_text(p.constraints, catalog);
    body += p.constraints.size() == 1 ? conj : "(" + conj + ")";
  }
  return "Utterance and (" + body + ")";
}

OntologyDoc emit_ontology(const DefinitionSet& defs, const std::string& iri) {
  if (defs.definitions.empty()) {
    throw Error(Errc::empty_set, "no definitions to emit");
  }
  OntologyDoc doc;
  doc.iri = iri;
  std::string prefix_iri = iri;
  if (prefix_iri.empty() || (prefix_iri.back() != '#' && prefix_iri.back() != '/')) {
    prefix_iri += '#';
  }
  std::string ontology_iri = prefix_iri;
  if (ontology_iri.back() == '#') ontology_iri.pop_back();

  for (const ClassDefinition& def : defs.definitions) {
    doc.expressions[def.label] = emit_class_expression(def, defs.catalog);
  }
  // Data property declarations for every referenced descriptor, catalog order.
  for (const FeatureDescriptor& d : defs.catalog.descriptors) {
    bool referenced = false;
    for (const ClassDefinition& def : defs.definitions) {
      for (const IntervalConstraint& c : def.constraints) {
        if (c.descriptor_id == d.id) referenced = true;
      }
      for (const PathRule& p : def.paths) {
        for (const IntervalConstraint& c : p.constraints) {
          if (c.descriptor_id == d.id) referenced = true;
        }
      }
    }
    if (referenced) {
      doc.data_properties.emplace_back(
          property_name(d.id),
          d.value_type == ValueType::binary ? "xsd:boolean" : "xsd:decimal");
    }
  }

  std::ostringstream out;
  out << "Prefix: : <" << prefix_iri << ">\n";
  out << "Prefix: rdfs: <http://www.w3.org/2000/01/rdf-schema#>\n";
  out << "Prefix: xsd: <http://www.w3.org/2001/XMLSchema#>\n\n";
  out << "Ontology: <" << ontology_iri << ">\n\n";
  out << "AnnotationProperty: rdfs:comment\n\n";
  std::size_t prop_index = 0;
  for (const FeatureDescriptor& d : defs.catalog.descriptors) {
    if (prop_index >= doc.data_properties.size() ||
        doc.data_properties[prop_index].first != property_name(d.id)) {
      continue;
    }
    const auto& [name, range] = doc.data_properties[prop_index++];
    out << "DataProperty: " << name << "\n";
    out << "    Annotations: rdfs:comment \"descriptor: " << d.id << "\"\n";
    out << "    Range: " << range << "\n\n";
  }
  out << "Class: Utterance\n\n";
  for (const ClassDefinition& def : defs.definitions) {
    out << "Class: " << level_name(def.label) << "LevelUtterance\n";
    out << "    SubClassOf: Utterance\n";
    out << "    EquivalentTo: " << doc.expressions.at(def.label) << "\n\n";
  }
  if (defs.definitions.size() >= 2) {
    out << "DisjointClasses: ";
    for (std::size_t i = 0; i < defs.definitions.size(); ++i) {
      if (i) out << ", ";
      out << level_name(defs.definitions[i].label) << "LevelUtterance";
    }
    out << "\n";
  }
  doc.text = out.str();
  return doc;
}

void save_ontology(const OntologyDoc& doc, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(Errc::io, "cannot write ontology: " + path);
  out << doc.text;
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

enum class Tok { ident, number, lparen, rparen, lbracket, rbracket, comma, op, end };

struct Token {
  Tok kind = Tok::end;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return current_; }

  Token take() {
    Token t = current_;
    advance();
    return t;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::syntax, "syntax error at offset " + std::to_string(current_.pos) + ": " +
                                  what + (current_.kind == Tok::end
                                              ? " (found end of input)"
                                              : " (found '" + current_.text + "')"));
  }

 private:
  void advance() {
    while (i_ < text_.size() && (text_[i_] == ' ' || text_[i_] == '\t' || text_[i_] == '\n' ||
                                 text_[i_] == '\r')) {
      ++i_;
    }
    current_ = Token{};
    current_.pos = i_;
    if (i_ >= text_.size()) {
      current_.kind = Tok::end;
      return;
    }
    const char c = text_[i_];
    auto single = [&](Tok k) {
      current_.kind = k;
      current_.text = std::string(1, c);
      ++i_;
    };
    switch (c) {
      case '(': single(Tok::lparen); return;
      case ')': single(Tok::rparen); return;
      case '[': single(Tok::lbracket); return;
      case ']': single(Tok::rbracket); return;
      case ',': single(Tok::comma); return;
      case '>':
      case '<': {
        current_.kind = Tok::op;
        current_.text = std::string(1, c);
        ++i_;
        if (i_ < text_.size() && text_[i_] == '=') {
          current_.text += '=';
          ++i_;
        }
        return;
      }
      default: break;
    }
    if ((c >= '0' && c <= '9') || c == '-' || c == '+' || c == '.') {
      const char* begin = text_.c_str() + i_;
      char* end = nullptr;
      current_.number = std::strtod(begin, &end);
      if (end == begin) {
        throw Error(Errc::syntax,
                    "syntax error at offset " + std::to_string(i_) + ": malformed number");
      }
      current_.kind = Tok::number;
      current_.text = std::string(begin, static_cast<std::size_t>(end - begin));
      i_ += static_cast<std::size_t>(end - begin);
      return;
    }
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
      std::size_t j = i_;
      while (j < text_.size() &&
             ((text_[j] >= 'a' && text_[j] <= 'z') || (text_[j] >= 'A' && text_[j] <= 'Z') ||
              (text_[j] >= '0' && text_[j] <= '9') || text_[j] == '_' || text_[j] == ':')) {
        ++j;
      }
      current_.kind = Tok::ident;
      current_.text = text_.substr(i_, j - i_);
      i_ = j;
      return;
    }
    throw Error(Errc::syntax, "syntax error at offset " + std::to_string(i_) +
                                  ": unexpected character '" + std::string(1, c) + "'");
  }

  const std::string& text_;
  std::size_t i_ = 0;
  Token current_;
};

struct AstNode {
  enum class Kind { utterance, atom, conj, disj } kind = Kind::utterance;
  IntervalConstraint constraint;            // atom
  std::vector<AstNode> children;            // conj / disj
};

class ExpressionParser {
 public:
  ExpressionParser(const std::string& text, const FeatureCatalog& catalog)
      : lex_(text), catalog_(catalog) {}

  AstNode parse() {
    AstNode root = description();
    if (lex_.peek().kind != Tok::end) lex_.fail("expected end of expression");
    return root;
  }

 private:
  AstNode description() {
    AstNode first = conjunction();
    if (lex_.peek().kind != Tok::ident || lex_.peek().text != "or") return first;
    AstNode node;
    node.kind = AstNode::Kind::disj;
    node.children.push_back(std::move(first));
    while (lex_.peek().kind == Tok::ident && lex_.peek().text == "or") {
      lex_.take();
      node.children.push_back(conjunction());
    }
    return node;
  }

  AstNode conjunction() {
    AstNode first = primary();
    if (lex_.peek().kind != Tok::ident || lex_.peek().text != "and") return first;
    AstNode node;
    node.kind = AstNode::Kind::conj;
    node.children.push_back(std::move(first));
    while (lex_.peek().kind == Tok::ident && lex_.peek().text == "and") {
      lex_.take();
      AstNode next = primary();
      if (next.kind == AstNode::Kind::conj) {  // flatten nested conjunctions
        for (AstNode& c : next.children) node.children.push_back(std::move(c));
      } else {
        node.children.push_back(std::move(next));
      }
    }
    return node;
  }

  AstNode primary() {
    if (lex_.peek().kind == Tok::lparen) {
      lex_.take();
      AstNode inner = description();
      if (lex_.peek().kind != Tok::rparen) lex_.fail("expected ')'");
      lex_.take();
      return inner;
    }
    if (lex_.peek().kind != Tok::ident) lex_.fail("expected a class or property name");
    const Token name = lex_.take();
    if (name.text == "Utterance") {
      AstNode node;
      node.kind = AstNode::Kind::utterance;
      return node;
    }
    return restriction(name);
  }

  AstNode restriction(const Token& prop) {
    AstNode node;
    node.kind = AstNode::Kind::atom;
    node.constraint.descriptor_id = resolve(prop);
    if (lex_.peek().kind != Tok::ident) lex_.fail("expected 'some' or 'value'");
    const Token kw = lex_.take();
    if (kw.text == "value") {
      if (lex_.peek().kind != Tok::ident ||
          (lex_.peek().text != "true" && lex_.peek().text != "false")) {
        lex_.fail("expected 'true' or 'false'");
      }
      const bool v = lex_.take().text == "true";
      // Canonical binary split constraint: values are {0,1}, midpoint 0.5.
      if (v) {
        node.constraint.lower = 0.5;
        node.constraint.lower_inclusive = false;
      } else {
        node.constraint.upper = 0.5;
        node.constraint.upper_inclusive = true;
      }
      return node;
    }
    if (kw.text != "some") lex_.fail("expected 'some' or 'value'");
    if (lex_.peek().kind != Tok::ident || lex_.peek().text != "xsd:decimal") {
      lex_.fail("expected 'xsd:decimal'");
    }
    lex_.take();
    if (lex_.peek().kind != Tok::lbracket) lex_.fail("expected '['");
    lex_.take();
    bool have_facet = false;
    while (true) {
      if (lex_.peek().kind != Tok::op) lex_.fail("expected a facet comparator");
      const std::string op = lex_.take().text;
      if (lex_.peek().kind != Tok::number) lex_.fail("expected a decimal literal");
      const double value = lex_.take().number;
      if (op == ">" || op == ">=") {
        if (node.constraint.lower) lex_.fail("duplicate lower facet");
        node.constraint.lower = value;
        node.constraint.lower_inclusive = op == ">=";
      } else {
        if (node.constraint.upper) lex_.fail("duplicate upper facet");
        node.constraint.upper = value;
        node.constraint.upper_inclusive = op == "<=";
      }
      have_facet = true;
      if (lex_.peek().kind == Tok::comma) {
        lex_.take();
        continue;
      }
      break;
    }
    if (lex_.peek().kind != Tok::rbracket) lex_.fail("expected ']'");
    lex_.take();
    if (!have_facet) lex_.fail("empty facet list");
    return node;
  }

  std::string resolve(const Token& prop) {
    for (const FeatureDescriptor& d : catalog_.descriptors) {
      if (property_name(d.id) == prop.text) return d.id;
    }
    throw Error(Errc::unknown_property, "unknown data property at offset " +
                                            std::to_string(prop.pos) + ": " + prop.text);
  }

  Lexer lex_;
  const FeatureCatalog& catalog_;
};

std::vector<IntervalConstraint> atoms_to_constraints(const std::vector<AstNode>& nodes,
                                                     const FeatureCatalog& catalog) {
  std::vector<IntervalConstraint> out;
  for (const AstNode& n : nodes) {
    if (n.kind != AstNode::Kind::atom) {
      throw Error(Errc::syntax, "unsupported expression shape: expected property restrictions");
    }
    bool merged = false;
    for (IntervalConstraint& c : out) {
      if (c.descriptor_id == n.constraint.descriptor_id) {
        c = intersect(c, n.constraint);
        merged = true;
      }
    }
    if (!merged) out.push_back(n.constraint);
  }
  return catalog_ordered(std::move(out), catalog);
}

}  // namespace

ClassDefinition parse_class_expression(const std::string& text, const FeatureCatalog& catalog,
                                       Level label) {
  ExpressionParser parser(text, catalog);
  AstNode root = parser.parse();

  // Expect `Utterance and <body>`: a top-level conjunction whose first element
  // is the Utterance reference.
  if (root.kind != AstNode::Kind::conj || root.children.empty() ||
      root.children.front().kind != AstNode::Kind::utterance) {
    throw Error(Errc::syntax, "expression must have the form 'Utterance and ...'");
  }
  std::vector<AstNode> body(std::make_move_iterator(root.children.begin() + 1),
                            std::make_move_iterator(root.children.end()));
  if (body.empty()) {
    throw Error(Errc::syntax, "expression has no restrictions after 'Utterance and'");
  }

  ClassDefinition def;
  def.label = label;
  if (body.size() == 1 && body.front().kind == AstNode::Kind::disj) {
    def.mode = DefinitionMode::exact;
    for (AstNode& alt : body.front().children) {
      PathRule rule;
      rule.label = label;
      if (alt.kind == AstNode::Kind::atom) {
        rule.constraints = atoms_to_constraints({alt}, catalog);
      } else if (alt.kind == AstNode::Kind::conj) {
        rule.constraints = atoms_to_constraints(alt.children, catalog);
      } else {
        throw Error(Errc::syntax, "unsupported disjunct shape");
      }
      def.paths.push_back(std::move(rule));
    }
    return def;
  }
  def.mode = DefinitionMode::box;
  def.constraints = atoms_to_constraints(body, catalog);
  return def;
}

// ---------------------------------------------------------------------------
// Structural comparison
// ---------------------------------------------------------------------------

namespace {

bool same_interval(const IntervalConstraint& a, const IntervalConstraint& b) {
  if (a.descriptor_id != b.descriptor_id) return false;
  if (a.lower.has_value() != b.lower.has_value()) return false;
  if (a.lower && (*a.lower != *b.lower || a.lower_inclusive != b.lower_inclusive)) return false;
  if (a.upper.has_value() != b.upper.has_value()) return false;
  if (a.upper && (*a.upper != *b.upper || a.upper_inclusive != b.upper_inclusive)) return false;
  return true;
}

// A definition as a list of constraint boxes: a box definition is one box, an
// exact definition is one box per path.
std::vector<const std::vector<IntervalConstraint>*> as_boxes(const ClassDefinition& d) {
  std::vector<const std::vector<IntervalConstraint>*> out;
  if (d.mode == DefinitionMode::box) {
    out.push_back(&d.constraints);
  } else {
    for (const PathRule& p : d.paths) out.push_back(&p.constraints);
  }
  return out;
}

}  // namespace

bool structurally_equal(const ClassDefinition& a, const ClassDefinition& b) {
  if (a.label != b.label) return false;
  const auto boxes_a = as_boxes(a);
  const auto boxes_b = as_boxes(b);
  if (boxes_a.size() != boxes_b.size()) return false;
  for (std::size_t i = 0; i < boxes_a.size(); ++i) {
    if (boxes_a[i]->size() != boxes_b[i]->size()) return false;
    for (std::size_t k = 0; k < boxes_a[i]->size(); ++k) {
      if (!same_interval((*boxes_a[i])[k], (*boxes_b[i])[k])) return false;
    }
  }
  return true;
}

}  // namespace leveldef
