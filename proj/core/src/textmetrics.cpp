#include "leveldef/textmetrics.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "leveldef/error.hpp"

namespace leveldef {

namespace {

bool is_ws(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || is_upper(c); }
bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

// Byte-level classification of the codepoint starting at text[i].
// Returns its byte length and whether it belongs in a token.
struct CharClass {
  std::size_t len = 1;
  bool in_token = false;
  bool letter = false;
  bool apostrophe = false;
};

CharClass classify(std::string_view text, std::size_t i) {
  CharClass c;
  const unsigned char b = static_cast<unsigned char>(text[i]);
  if (b < 0x80) {
    if (is_alpha(static_cast<char>(b))) {
      c.in_token = c.letter = true;
    } else if (is_digit(static_cast<char>(b))) {
      c.in_token = true;
    } else if (b == '\'') {
      c.in_token = c.apostrophe = true;
    }
    return c;
  }
  // Multibyte UTF-8. Determine sequence length from the lead byte.
  std::size_t len = 1;
  if ((b & 0xE0) == 0xC0) len = 2;
  else if ((b & 0xF0) == 0xE0) len = 3;
  else if ((b & 0xF8) == 0xF0) len = 4;
  while (i + len > text.size()) --len;  // truncated sequence at end of input
  c.len = len;
  // U+2000..U+206F (general punctuation, lead E2 80/81) breaks tokens, except
  // the right single quote U+2019 which acts as an apostrophe.
  if (len == 3 && b == 0xE2) {
    const unsigned char b1 = static_cast<unsigned char>(text[i + 1]);
    const unsigned char b2 = static_cast<unsigned char>(text[i + 2]);
    if (b1 == 0x80 && b2 == 0x99) {
      c.in_token = c.apostrophe = true;
      return c;
    }
    if (b1 == 0x80 || b1 == 0x81) return c;  // punctuation
  }
  c.in_token = c.letter = true;  // any other non-ASCII codepoint
  return c;
}

// The word immediately before position `dot` (letters, digits and internal
// periods), used for abbreviation suppression: "Dr." -> "dr", "e.g." -> "e.g".
std::string word_before(std::string_view text, std::size_t dot) {
  std::size_t end = dot;
  std::size_t begin = end;
  while (begin > 0) {
    const char c = text[begin - 1];
    if (is_alpha(c) || is_digit(c) || c == '.') {
      --begin;
    } else {
      break;
    }
  }
  while (begin < end && text[begin] == '.') ++begin;  // strip leading dots
  return ascii_lower(text.substr(begin, end - begin));
}

}  // namespace

std::size_t Document::token_count() const {
  std::size_t n = 0;
  for (const auto& sent : tokens) n += sent.size();
  return n;
}

std::vector<SentenceSpan> segment_sentences(std::string_view text, const WordSet& abbreviations) {
  std::vector<SentenceSpan> spans;
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  std::size_t start = npos;
  std::size_t last_content = npos;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (!is_ws(c) && start == npos) start = i;
    if (!is_ws(c)) last_content = i;
    if (is_terminator(c) && start != npos) {
      std::size_t run_end = i;
      while (run_end < text.size() && is_terminator(text[run_end])) ++run_end;
      std::size_t next = run_end;
      while (next < text.size() && is_ws(text[next])) ++next;
      bool boundary = false;
      if (next == text.size()) {
        boundary = true;
      } else if (next > run_end && is_upper(text[next])) {
        boundary = true;
        // A single period after a known abbreviation is not a boundary.
        if (run_end - i == 1 && c == '.' &&
            abbreviations.count(word_before(text, i)) > 0) {
          boundary = false;
        }
      }
      if (boundary) {
        spans.push_back({start, run_end});
        start = npos;
      }
      last_content = run_end - 1;
      i = run_end;
      continue;
    }
    ++i;
  }
  if (start != npos && last_content != npos && last_content >= start) {
    spans.push_back({start, last_content + 1});
  }
  return spans;
}

std::vector<Token> tokenize(std::string_view sentence, std::size_t base_offset) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < sentence.size()) {
    CharClass c = classify(sentence, i);
    if (!c.in_token) {
      i += c.len;
      continue;
    }
    Token tok;
    tok.offset = base_offset + i;
    const std::size_t begin = i;
    while (i < sentence.size()) {
      CharClass cc = classify(sentence, i);
      if (!cc.in_token) break;
      i += cc.len;
    }
    tok.surface = std::string(sentence.substr(begin, i - begin));
    tok.capitalized = !tok.surface.empty() && is_upper(tok.surface.front());
    tokens.push_back(std::move(tok));
  }
  return tokens;
}

Document analyze(std::string_view text, const WordSet& abbreviations) {
  Document doc;
  doc.text = std::string(text);
  doc.sentences = segment_sentences(doc.text, abbreviations);
  doc.tokens.reserve(doc.sentences.size());
  for (const SentenceSpan& span : doc.sentences) {
    auto toks = tokenize(std::string_view(doc.text).substr(span.begin, span.end - span.begin),
                         span.begin);
    if (!toks.empty()) toks.front().sentence_initial = true;
    doc.tokens.push_back(std::move(toks));
  }
  return doc;
}

// ---------------------------------------------------------------------------
// Syllables and readability formulas
// ---------------------------------------------------------------------------

namespace {
bool is_vowel(char c) {
  return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y';
}
}  // namespace

std::size_t count_syllables(std::string_view word) {
  if (word.empty()) return 1;
  const std::string w = ascii_lower(word);
  std::size_t groups = 0;
  bool in_group = false;
  for (char c : w) {
    if (is_vowel(c)) {
      if (!in_group) ++groups;
      in_group = true;
    } else {
      in_group = false;
    }
  }
  // Word-final silent e, except a consonant+"le" ending ("table", "little").
  std::string_view letters = w;
  while (!letters.empty() && !is_alpha(letters.back())) letters.remove_suffix(1);
  if (letters.size() >= 2 && letters.back() == 'e') {
    const bool cons_le = letters.size() >= 3 && letters[letters.size() - 2] == 'l' &&
                         is_alpha(letters[letters.size() - 3]) &&
                         !is_vowel(letters[letters.size() - 3]);
    if (!cons_le && groups > 0) --groups;
  }
  return groups > 0 ? groups : 1;
}

namespace {
void require_counts(std::size_t words, std::size_t sentences, const char* op) {
  if (words == 0 || sentences == 0) {
    throw Error(Errc::degenerate_input,
                std::string(op) + ": needs at least one word and one sentence");
  }
}
}  // namespace

double flesch_kincaid(std::size_t words, std::size_t sentences, std::size_t syllables) {
  require_counts(words, sentences, "flesch_kincaid");
  const double w = static_cast<double>(words);
  return 0.39 * (w / static_cast<double>(sentences)) +
         11.8 * (static_cast<double>(syllables) / w) - 15.59;
}

double gunning_fog(std::size_t words, std::size_t sentences, std::size_t complex_words) {
  require_counts(words, sentences, "gunning_fog");
  const double w = static_cast<double>(words);
  return 0.4 * (w / static_cast<double>(sentences) +
                100.0 * static_cast<double>(complex_words) / w);
}

double dale_chall(std::size_t words, std::size_t sentences, std::size_t difficult_words) {
  require_counts(words, sentences, "dale_chall");
  const double w = static_cast<double>(words);
  const double pdw = 100.0 * static_cast<double>(difficult_words) / w;
  const double asl = w / static_cast<double>(sentences);
  double score = 0.1579 * pdw + 0.0496 * asl;
  if (pdw > 5.0) score += 3.6365;
  return score;
}

bool is_familiar_word(std::string_view word, const WordSet& dale_chall_list) {
  const std::string w = ascii_lower(word);
  if (dale_chall_list.count(w)) return true;
  for (std::string_view suffix : {"s", "es", "ed", "ing"}) {
    if (w.size() > suffix.size() && w.ends_with(suffix) &&
        dale_chall_list.count(w.substr(0, w.size() - suffix.size()))) {
      return true;
    }
  }
  return false;
}

// ---------------------------------------------------------------------------
// Catalog
// ---------------------------------------------------------------------------

const char* to_string(DescriptorKind k) {
  switch (k) {
    case DescriptorKind::readability: return "readability";
    case DescriptorKind::lexical: return "lexical";
    case DescriptorKind::syntactic: return "syntactic";
    case DescriptorKind::discourse: return "discourse";
  }
  return "?";
}

const char* to_string(ValueType t) {
  return t == ValueType::numeric ? "numeric" : "binary";
}

namespace {
DescriptorKind parse_kind(const std::string& s) {
  if (s == "readability") return DescriptorKind::readability;
  if (s == "lexical") return DescriptorKind::lexical;
  if (s == "syntactic") return DescriptorKind::syntactic;
  if (s == "discourse") return DescriptorKind::discourse;
  throw Error(Errc::parse, "unknown descriptor kind: " + s);
}

ValueType parse_value_type(const std::string& s) {
  if (s == "numeric") return ValueType::numeric;
  if (s == "binary") return ValueType::binary;
  throw Error(Errc::parse, "unknown value_type: " + s);
}
}  // namespace

std::size_t FeatureCatalog::index_of(std::string_view id) const {
  for (std::size_t i = 0; i < descriptors.size(); ++i) {
    if (descriptors[i].id == id) return i;
  }
  return npos;
}

FeatureCatalog default_catalog() {
  using K = DescriptorKind;
  using V = ValueType;
  return FeatureCatalog{{
      {"flesch_kincaid", K::readability, V::numeric},
      {"gunning_fog", K::readability, V::numeric},
      {"dale_chall", K::readability, V::numeric},
      {"avg_word_length", K::lexical, V::numeric},
      {"named_entity_count", K::lexical, V::numeric},
      {"avg_sentence_length", K::syntactic, V::numeric},
      {"coordination_count", K::syntactic, V::numeric},
      {"subordination_count", K::syntactic, V::numeric},
      {"pronoun_density", K::discourse, V::numeric},
      {"indirect_speech", K::discourse, V::binary},
  }};
}

FeatureCatalog parse_catalog(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::parse, std::string("catalog: ") + e.what());
  }
  if (!j.is_array() || j.empty()) {
    throw Error(Errc::parse, "catalog: expected a non-empty JSON array");
  }
  FeatureCatalog catalog;
  std::unordered_set<std::string> seen;
  for (const auto& entry : j) {
    if (!entry.is_object() || !entry.contains("id")) {
      throw Error(Errc::parse, "catalog: each entry needs an 'id'");
    }
    FeatureDescriptor d;
    d.id = entry.at("id").get<std::string>();
    d.kind = parse_kind(entry.value("kind", "lexical"));
    d.value_type = parse_value_type(entry.value("value_type", "numeric"));
    if (!seen.insert(d.id).second) {
      throw Error(Errc::parse, "catalog: duplicate id: " + d.id);
    }
    catalog.descriptors.push_back(std::move(d));
  }
  return catalog;
}

FeatureCatalog load_catalog(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open catalog: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str());
}

std::string catalog_to_json(const FeatureCatalog& catalog) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& d : catalog.descriptors) {
    j.push_back({{"id", d.id}, {"kind", to_string(d.kind)}, {"value_type", to_string(d.value_type)}});
  }
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

namespace {
std::size_t letter_count(std::string_view surface) {
  std::size_t letters = 0;
  std::size_t i = 0;
  while (i < surface.size()) {
    CharClass c = classify(surface, i);
    if (c.letter) ++letters;
    i += c.len;
  }
  return letters;
}
}  // namespace

TextStats compute_stats(const Document& doc, const Lexicons& lex) {
  TextStats st;
  st.sentences = doc.sentence_count();
  for (const auto& sent : doc.tokens) {
    bool reporting_seen = false;
    for (const Token& tok : sent) {
      ++st.words;
      st.letters += letter_count(tok.surface);
      st.syllables += count_syllables(tok.surface);
      const bool proper = tok.capitalized && !tok.sentence_initial;
      if (count_syllables(tok.surface) >= 3 && !proper) ++st.complex_words;
      if (!is_familiar_word(tok.surface, lex.dale_chall)) ++st.difficult_words;
      if (proper) ++st.named_entities;
      const std::string lowered = ascii_lower(tok.surface);
      if (lex.coordinators.count(lowered)) ++st.coordinators;
      if (lex.subordinators.count(lowered)) ++st.subordinators;
      if (lex.pronouns.count(lowered)) ++st.pronouns;
      if (reporting_seen && lowered == "that") st.indirect_speech = true;
      if (lex.reporting_verbs.count(lowered)) reporting_seen = true;
    }
  }
  if (st.words == 0) {
    throw Error(Errc::degenerate_input, "document has no tokens");
  }
  return st;
}

FeatureVector extract_features(const Document& doc, const FeatureCatalog& catalog,
                               const Lexicons& lex) {
  const TextStats st = compute_stats(doc, lex);
  FeatureVector fv;
  fv.values.reserve(catalog.size());
  for (const FeatureDescriptor& d : catalog.descriptors) {
    double v = 0.0;
    if (d.id == "flesch_kincaid") {
      v = flesch_kincaid(st.words, st.sentences, st.syllables);
    } else if (d.id == "gunning_fog") {
      v = gunning_fog(st.words, st.sentences, st.complex_words);
    } else if (d.id == "dale_chall") {
      v = dale_chall(st.words, st.sentences, st.difficult_words);
    } else if (d.id == "avg_word_length") {
      v = static_cast<double>(st.letters) / static_cast<double>(st.words);
    } else if (d.id == "named_entity_count") {
      v = static_cast<double>(st.named_entities);
    } else if (d.id == "avg_sentence_length") {
      v = static_cast<double>(st.words) / static_cast<double>(st.sentences);
    } else if (d.id == "coordination_count") {
      v = static_cast<double>(st.coordinators);
    } else if (d.id == "subordination_count") {
      v = static_cast<double>(st.subordinators);
    } else if (d.id == "pronoun_density") {
      v = static_cast<double>(st.pronouns) / static_cast<double>(st.words);
    } else if (d.id == "indirect_speech") {
      v = st.indirect_speech ? 1.0 : 0.0;
    } else {
      throw Error(Errc::unknown_descriptor, "cannot compute descriptor: " + d.id);
    }
    fv.values.push_back(v);
  }
  return fv;
}

FeatureVector extract_features(std::string_view text, const FeatureCatalog& catalog,
                               const Lexicons& lex) {
  return extract_features(analyze(text, lex.abbreviations), catalog, lex);
}

}  // namespace leveldef
