#ifndef LEVELDEF_TEXTMETRICS_HPP
#define LEVELDEF_TEXTMETRICS_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "leveldef/lexicon.hpp"

namespace leveldef {

// ---------------------------------------------------------------------------
// Document model
// ---------------------------------------------------------------------------

/// Half-open byte range [begin, end) into the original text.
struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

struct Token {
  std::string surface;
  std::size_t offset = 0;            // byte offset into the original text
  bool capitalized = false;          // first character is an ASCII uppercase letter
  bool sentence_initial = false;     // first token of its sentence
};

struct Document {
  std::string text;
  std::vector<SentenceSpan> sentences;
  std::vector<std::vector<Token>> tokens;  // one vector per sentence

  std::size_t sentence_count() const { return sentences.size(); }
  std::size_t token_count() const;
};

/// Sentence boundaries sit after runs of `.`, `!`, `?` that are followed by
/// whitespace plus an uppercase letter or by end-of-text. A trailing period
/// whose preceding word is in `abbreviations` does not end a sentence.
/// Spans cover all non-whitespace content; empty text yields no spans.
std::vector<SentenceSpan> segment_sentences(std::string_view text,
                                            const WordSet& abbreviations);

/// Tokens are maximal runs of letters, digits and apostrophes. Bytes >= 0x80
/// are treated as letters except the common UTF-8 punctuation blocks; U+2019
/// counts as an apostrophe.
std::vector<Token> tokenize(std::string_view sentence, std::size_t base_offset = 0);

/// Segments and tokenizes in one pass.
Document analyze(std::string_view text, const WordSet& abbreviations);

// ---------------------------------------------------------------------------
// Feature catalog
// ---------------------------------------------------------------------------

enum class DescriptorKind { readability, lexical, syntactic, discourse };
enum class ValueType { numeric, binary };

struct FeatureDescriptor {
  std::string id;      // stable snake_case key
  DescriptorKind kind;
  ValueType value_type;
};

/// Ordered descriptor list; the order fixes column order everywhere downstream.
struct FeatureCatalog {
  std::vector<FeatureDescriptor> descriptors;

  std::size_t size() const { return descriptors.size(); }
  /// Index of `id`, or npos when absent.
  std::size_t index_of(std::string_view id) const;
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Dense value vector aligned with a FeatureCatalog.
struct FeatureVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// The ten descriptors computed by this module:
///   flesch_kincaid, gunning_fog, dale_chall            (readability)
///   avg_word_length, named_entity_count                (lexical)
///   avg_sentence_length, coordination_count,
///   subordination_count                                (syntactic)
///   pronoun_density, indirect_speech [binary]          (discourse)
FeatureCatalog default_catalog();

/// Reads a catalog from a JSON array of {id, kind, value_type}. Throws
/// Errc::parse on malformed input, duplicate ids, or an empty array.
FeatureCatalog load_catalog(const std::string& path);
FeatureCatalog parse_catalog(const std::string& json_text);
std::string catalog_to_json(const FeatureCatalog& catalog);

const char* to_string(DescriptorKind k);
const char* to_string(ValueType t);

// ---------------------------------------------------------------------------
// Readability formulas (pure, count-based)
// ---------------------------------------------------------------------------

std::size_t count_syllables(std::string_view word);

/// 0.39*(W/S) + 11.8*(Syl/W) - 15.59
double flesch_kincaid(std::size_t words, std::size_t sentences, std::size_t syllables);

/// 0.4*((W/S) + 100*(complex/W)); complex = >= 3 syllables and not a proper noun
double gunning_fog(std::size_t words, std::size_t sentences, std::size_t complex_words);

/// 0.1579*PDW + 0.0496*ASL, plus 3.6365 when PDW > 5,
/// with PDW = 100*difficult/W and ASL = W/S.
double dale_chall(std::size_t words, std::size_t sentences, std::size_t difficult_words);

/// Familiar = present in the list after lowercasing, directly or with one of
/// -s/-es/-ed/-ing stripped.
bool is_familiar_word(std::string_view word, const WordSet& dale_chall_list);

// ---------------------------------------------------------------------------
// Document-level extraction
// ---------------------------------------------------------------------------

/// Raw counts shared by several descriptors.
struct TextStats {
  std::size_t words = 0;
  std::size_t sentences = 0;
  std::size_t syllables = 0;
  std::size_t complex_words = 0;     // gunning-fog sense
  std::size_t difficult_words = 0;   // dale-chall sense
  std::size_t letters = 0;
  std::size_t named_entities = 0;    // capitalized non-sentence-initial tokens
  std::size_t coordinators = 0;
  std::size_t subordinators = 0;
  std::size_t pronouns = 0;
  bool indirect_speech = false;      // reporting verb ... "that" within one sentence
};

/// Throws Errc::degenerate_input when the document has no tokens.
TextStats compute_stats(const Document& doc, const Lexicons& lex);

/// One value per catalog descriptor, in catalog order. Unknown ids raise
/// Errc::unknown_descriptor.
FeatureVector extract_features(const Document& doc, const FeatureCatalog& catalog,
                               const Lexicons& lex);

/// analyze() + extract_features() for raw text.
FeatureVector extract_features(std::string_view text, const FeatureCatalog& catalog,
                               const Lexicons& lex);

}  // namespace leveldef

#endif
