#ifndef LEVELDEF_FIXTURE_HPP
#define LEVELDEF_FIXTURE_HPP

#include <cstdint>

#include "leveldef/corpus.hpp"

namespace leveldef {

/// Synthetic corpus whose difficulty signals rise monotonically with the
/// level ordinal: per-sentence token count 4+3*ordinal (jitter +/-1),
/// rare-word rate 0.02+0.04*ordinal, subordinate-clause rate 0.06*ordinal.
/// Texts have 4-7 sentences. Fully deterministic for a fixed seed.
struct FixtureParams {
  std::size_t texts_per_level = 200;
  std::uint64_t seed = 42;
};

LabeledCorpus generate_fixture_corpus(const FixtureParams& params = {});

}  // namespace leveldef

#endif
