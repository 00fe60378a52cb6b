#include "editnts/toy_corpus.hpp"

#include <array>
#include <random>
#include <stdexcept>
#include <string_view>
#include <utility>

#include "editnts/random.hpp"

namespace editnts {

namespace {

constexpr std::array<std::string_view, 2> kDeterminers = {"the", "a"};
constexpr std::array<std::string_view, 8> kAdjectives = {"big",   "small", "old",   "young",
                                                         "happy", "tall",  "quiet", "bright"};
constexpr std::array<std::string_view, 10> kNouns = {"cat",    "dog",   "man",     "woman",  "child",
                                                     "bird",   "farmer", "teacher", "doctor", "boy"};
constexpr std::array<std::string_view, 4> kAdverbs = {"quickly", "slowly", "quietly", "carefully"};
constexpr std::array<std::pair<std::string_view, std::string_view>, 8> kVerbs = {{
    {"utilized", "used"},
    {"purchased", "bought"},
    {"observed", "saw"},
    {"assisted", "helped"},
    {"constructed", "built"},
    {"requested", "asked"},
    {"located", "found"},
    {"visited", "visited"},
}};
constexpr std::array<std::string_view, 3> kPrepositions = {"in", "near", "with"};
constexpr std::array<std::string_view, 4> kPlaces = {"park", "house", "garden", "town"};

template <typename Array>
std::string_view pick(std::mt19937_64& rng, const Array& a) {
  return a[uniform_index(rng, a.size())];
}

struct Builder {
  Tokens complex, complex_pos, simple, simple_pos;

  void both(std::string_view w, std::string_view tag) {
    complex.emplace_back(w);
    complex_pos.emplace_back(tag);
    simple.emplace_back(w);
    simple_pos.emplace_back(tag);
  }
  void complex_only(std::string_view w, std::string_view tag) {
    complex.emplace_back(w);
    complex_pos.emplace_back(tag);
  }
};

}  // namespace

std::vector<SentencePair> make_toy_corpus(const ToyCorpusOptions& opt) {
  if (opt.pairs == 0) throw std::invalid_argument("toy corpus needs at least one pair");
  std::mt19937_64 rng(opt.seed);
  auto chance = [&](double p) { return uniform01(rng) < p; };

  auto noun_phrase = [&](Builder& b, std::size_t max_adjectives) {
    b.both(pick(rng, kDeterminers), "DT");
    const auto adjectives = uniform_index(rng, max_adjectives + 1);
    for (std::size_t i = 0; i < adjectives; ++i) {
      auto adj = pick(rng, kAdjectives);
      if (chance(opt.drop_adjective)) {
        b.complex_only(adj, "JJ");
      } else {
        b.both(adj, "JJ");
      }
    }
    b.both(pick(rng, kNouns), "NN");
  };

  std::vector<SentencePair> out;
  std::size_t attempts = 0;
  while (out.size() < opt.pairs) {
    if (++attempts > 1000 * opt.pairs) throw std::runtime_error("toy corpus generator is stuck");
    Builder b;
    noun_phrase(b, 2);
    if (chance(0.4)) {
      auto adv = pick(rng, kAdverbs);
      if (chance(opt.drop_adverb)) {
        b.complex_only(adv, "RB");
      } else {
        b.both(adv, "RB");
      }
    }
    const auto& [formal, plain] = kVerbs[uniform_index(rng, kVerbs.size())];
    b.complex_only(formal, "VBD");
    if (formal != plain && chance(opt.swap_verb)) {
      b.simple.emplace_back(plain);
      b.simple_pos.emplace_back("VBD");
    } else {
      b.simple.emplace_back(formal);
      b.simple_pos.emplace_back("VBD");
    }
    noun_phrase(b, 1);
    if (chance(0.3)) {
      b.both(pick(rng, kPrepositions), "IN");
      b.both(pick(rng, kDeterminers), "DT");
      b.both(pick(rng, kPlaces), "NN");
    }
    b.both(".", ".");

    SentencePair pair;
    pair.complex = Sentence(std::move(b.complex), std::move(b.complex_pos));
    pair.simple = Sentence(std::move(b.simple), std::move(b.simple_pos));
    if (!opt.allow_identical && pair.identical()) continue;
    pair.line = out.size() + 1;
    out.push_back(std::move(pair));
  }
  return out;
}

}  // namespace editnts
