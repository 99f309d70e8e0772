#ifndef LEVELDEF_LEXICON_HPP
#define LEVELDEF_LEXICON_HPP

#include <string>
#include <unordered_set>

namespace leveldef {

using WordSet = std::unordered_set<std::string>;

/// Loads a one-word-per-line UTF-8 list. '#' lines are comments, blank lines
/// are skipped, entries are lowercased. Throws Errc::missing_data when the
/// file cannot be opened.
WordSet load_word_list(const std::string& path);

/// Word lists backing the heuristic descriptors. All entries are lowercase
/// ASCII; lookups go through ascii_lower() so matching is case-insensitive.
struct Lexicons {
  WordSet dale_chall;       // familiar words for the Dale-Chall score
  WordSet pronouns;         // personal/possessive/reflexive pronouns
  WordSet coordinators;     // and/or/but/nor
  WordSet subordinators;    // because/although/...
  WordSet reporting_verbs;  // said/claimed/... for indirect speech
  WordSet abbreviations;    // entries without the trailing period (dr, e.g, ...)

  /// Loads all lists from `<dir>/dale_chall_3000.txt` and `<dir>/lexicons/*`.
  static Lexicons load(const std::string& data_dir);

  /// Loads from the default data directory: $LEVELDEF_DATA_DIR if set,
  /// otherwise the compiled-in location.
  static Lexicons bundled();
};

/// Resolution used by Lexicons::bundled(); exposed so the CLI can report it.
std::string default_data_dir();

/// ASCII lowercasing; bytes outside A-Z pass through unchanged. This is the
/// normalization applied before every lexicon lookup.
std::string ascii_lower(std::string_view s);

}  // namespace leveldef

#endif
