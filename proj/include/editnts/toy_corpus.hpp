#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "editnts/corpus.hpp"

namespace editnts {

/// Synthetic tagged simplification pairs built from a tiny grammar:
///
///   complex: DT JJ* NN [RB] VBD DT JJ* NN [IN DT NN] .
///   simple:  the same with adjectives and adverbs dropped and formal verbs
///            replaced by plain synonyms
///
/// Each rewrite fires with its own probability, so values below 1 make the
/// corpus ambiguous.
struct ToyCorpusOptions {
  std::size_t pairs = 50;
  std::uint64_t seed = 7;
  double drop_adjective = 1.0;
  double drop_adverb = 1.0;
  double swap_verb = 1.0;
  bool allow_identical = false;
};

std::vector<SentencePair> make_toy_corpus(const ToyCorpusOptions& options);

}  // namespace editnts
