#pragma once

// Small models and examples shared by the model, trainer and acceptance tests.

#include <string>
#include <vector>

#include "editnts/corpus.hpp"
#include "editnts/model.hpp"
#include "editnts/oracle.hpp"

namespace fixtures {

using namespace editnts;

/// Five regular tokens w0..w4, ten ids in total.
inline Vocabulary tiny_vocab() {
  Vocabulary v;
  for (int i = 0; i < 5; ++i) v.add("w" + std::to_string(i));
  return v;
}

inline ModelConfig tiny_config(std::size_t vocab_size = 10) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  c.word_dim = 6;
  c.pos_dim = 4;
  c.hidden = 8;
  c.proj_dim = 8;
  c.dropout = 0.0;
  return c;
}

inline SentencePair pair(const std::string& complex, const std::string& simple) {
  SentencePair p;
  p.complex = Sentence(split_tokens(complex));
  p.simple = Sentence(split_tokens(simple));
  return p;
}

inline Example example(const Vocabulary& vocab, const std::string& complex,
                       const std::string& simple) {
  auto p = pair(complex, simple);
  return make_example(p, construct_program(p.complex.tokens, p.simple.tokens), vocab);
}

/// Scalars of a parameter tensor, looked up by name.
template <typename Real>
ad::Mat<Real>& param(Model<Real>& m, const std::string& name) {
  for (auto& p : m.params()) {
    if (p.name == name) return p.value;
  }
  throw std::out_of_range("no parameter " + name);
}

}  // namespace fixtures
