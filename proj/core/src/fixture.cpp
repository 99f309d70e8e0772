#include "leveldef/fixture.hpp"

#include <random>

namespace leveldef {

namespace {

// Short familiar words (all on the bundled Dale-Chall list).
constexpr const char* kEasyWords[] = {
    "the",    "day",    "time",  "house",  "water",  "friend", "school", "book",
    "hand",   "home",   "play",  "work",   "good",   "small",  "big",    "old",
    "new",    "happy",  "dog",   "cat",    "tree",   "road",   "sun",    "rain",
    "food",   "door",   "room",  "table",  "chair",  "garden", "morning", "night",
    "story",  "game",   "song",  "bird",   "fish",   "horse",  "farm",   "town",
    "street", "shop",   "ball",  "box",    "cup",    "milk",   "bread",  "apple",
    "walk",   "smile",
};

// Long unfamiliar words (3+ syllables, absent from the list).
constexpr const char* kRareWords[] = {
    "phenomenon",    "unprecedented", "sophisticated", "comprehensive", "intricate",
    "ambiguous",     "hypothesis",    "methodology",   "paradigm",      "subsequently",
    "notwithstanding", "juxtaposition", "quintessential", "proliferation", "idiosyncratic",
    "magnanimous",   "obfuscation",   "circumlocution", "grandiloquent", "multifaceted",
    "heterogeneous", "substantiate",  "corroborate",   "extrapolate",   "dichotomy",
    "empirical",     "ubiquitous",    "ephemeral",     "perfunctory",   "conjecture",
    "ramification",  "consortium",    "equilibrium",   "infrastructure", "contemporary",
    "deliberation",  "articulate",    "culmination",   "predicament",   "vicissitude",
};

constexpr const char* kNames[] = {"Anna", "Bob",   "Clara", "David", "Emma",
                                  "Felix", "Grace", "Henry", "Iris",  "Jack"};

constexpr const char* kPronouns[] = {"he", "she", "they", "we"};

constexpr const char* kSubordinators[] = {"because", "although", "while", "since"};

template <std::size_t N>
const char* pick(const char* const (&pool)[N], std::mt19937_64& gen) {
  return pool[gen() % N];
}

double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) / static_cast<double>(std::uint64_t{1} << 53);
}

std::string capitalize(std::string word) {
  if (!word.empty() && word.front() >= 'a' && word.front() <= 'z') {
    word.front() = static_cast<char>(word.front() - 'a' + 'A');
  }
  return word;
}

}  // namespace

LabeledCorpus generate_fixture_corpus(const FixtureParams& params) {
  std::mt19937_64 gen(params.seed);
  LabeledCorpus corpus;
  corpus.source_id = "synthetic-fixture";
  corpus.items.reserve(params.texts_per_level * kLevelCount);

  for (int lvl = 0; lvl < kLevelCount; ++lvl) {
    // Difficulty knobs, all monotone in the level ordinal.
    const int base_len = 4 + 3 * lvl;                    // tokens per sentence
    const double rare_rate = 0.02 + 0.04 * lvl;          // long-word probability
    const double subordination_rate = 0.06 * lvl;        // clause probability

    for (std::size_t t = 0; t < params.texts_per_level; ++t) {
      const std::size_t n_sentences = 4 + gen() % 4;
      std::string text;
      for (std::size_t s = 0; s < n_sentences; ++s) {
        const int len = base_len + static_cast<int>(gen() % 3) - 1;
        const bool with_clause = uniform01(gen) < subordination_rate && len >= 4;
        const std::size_t clause_at = with_clause ? 2 + gen() % (len - 3) : 0;
        std::string sentence;
        for (int w = 0; w < len; ++w) {
          std::string word;
          if (with_clause && static_cast<std::size_t>(w) == clause_at) {
            word = pick(kSubordinators, gen);
          } else if (w == 0 && uniform01(gen) < 0.25) {
            word = pick(kPronouns, gen);
          } else if (w > 0 && uniform01(gen) < 0.08) {
            word = pick(kNames, gen);
          } else if (uniform01(gen) < rare_rate) {
            word = pick(kRareWords, gen);
          } else {
            word = pick(kEasyWords, gen);
          }
          if (w == 0) word = capitalize(word);
          if (w > 0) sentence += ' ';
          sentence += word;
        }
        sentence += '.';
        if (s > 0) text += ' ';
        text += sentence;
      }
      corpus.items.push_back({std::move(text), static_cast<Level>(lvl), std::nullopt});
    }
  }
  return corpus;
}

}  // namespace leveldef
