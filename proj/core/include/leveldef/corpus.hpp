#ifndef LEVELDEF_CORPUS_HPP
#define LEVELDEF_CORPUS_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "leveldef/textmetrics.hpp"

namespace leveldef {

// ---------------------------------------------------------------------------
// CEFR levels
// ---------------------------------------------------------------------------

enum class Level : int { A1 = 0, A2 = 1, B1 = 2, B2 = 3, C1 = 4, C2 = 5 };

inline constexpr int kLevelCount = 6;
inline constexpr std::array<Level, kLevelCount> kAllLevels = {
    Level::A1, Level::A2, Level::B1, Level::B2, Level::C1, Level::C2};

inline int ordinal(Level l) { return static_cast<int>(l); }
const char* level_name(Level l);
/// Throws Errc::unknown_label for anything outside A1..C2.
Level parse_level(std::string_view name);

// ---------------------------------------------------------------------------
// Corpus
// ---------------------------------------------------------------------------

struct CorpusItem {
  std::string text;
  Level label;
  std::optional<Level> label2;  // second annotator, when present
};

struct LabeledCorpus {
  std::vector<CorpusItem> items;
  std::string source_id;

  std::size_t size() const { return items.size(); }
};

enum class CorpusFormat { csv, jsonl };

/// Throws Errc::parse for unknown formats.
CorpusFormat parse_corpus_format(std::string_view name);

/// CSV: UTF-8, header row required, RFC-4180 quoting, columns `text`, `label`
/// and optional `label2`. JSONL: one object per line with the same keys.
/// Errors carry the offending line number; labels are validated on load and
/// empty texts are rejected.
LabeledCorpus load_corpus(const std::string& path, CorpusFormat format);

/// Writes the corpus back out (RFC-4180 CSV or JSONL); round-trips exactly.
void save_corpus(const LabeledCorpus& corpus, const std::string& path, CorpusFormat format);

/// Deterministic per-class split. Each class keeps round(fraction * size)
/// items in train, clamped so both sides see every class; requires >= 2 items
/// per observed class (Errc::class_too_small otherwise).
struct SplitResult {
  LabeledCorpus train;
  LabeledCorpus validation;
  std::vector<std::size_t> train_indices;       // into the source corpus
  std::vector<std::size_t> validation_indices;
};
SplitResult stratified_split(const LabeledCorpus& corpus, double train_fraction,
                             std::uint64_t seed);

/// Fraction of items whose two annotations agree. Every item must carry
/// label2 (Errc::missing_second_label).
double agreement_score(const LabeledCorpus& corpus);

// ---------------------------------------------------------------------------
// Feature matrix
// ---------------------------------------------------------------------------

struct FeatureMatrix {
  std::vector<FeatureVector> rows;
  std::vector<Level> labels;
  FeatureCatalog catalog;

  std::size_t n() const { return rows.size(); }
  std::size_t m() const { return catalog.size(); }
};

/// Row i = extract_features(items[i].text). Extraction failures are rethrown
/// with the row index prepended.
FeatureMatrix build_matrix(const LabeledCorpus& corpus, const FeatureCatalog& catalog,
                           const Lexicons& lex);

}  // namespace leveldef

#endif
