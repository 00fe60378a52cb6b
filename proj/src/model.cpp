#include "editnts/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "editnts/errors.hpp"
#include "editnts/executor.hpp"
#include "editnts/random.hpp"

namespace editnts {

void ModelConfig::check() const {
  if (vocab_size <= static_cast<std::size_t>(Vocabulary::kNumReserved)) {
    throw std::invalid_argument("vocab_size must exceed the reserved block");
  }
  if (word_dim == 0 || pos_dim == 0 || pos_size == 0 || hidden == 0 || proj_dim == 0) {
    throw std::invalid_argument("model dimensions must be positive");
  }
  if (bidirectional && hidden % 2 != 0) {
    throw std::invalid_argument("bidirectional encoder needs an even hidden size");
  }
  if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("dropout must be in [0, 1)");
}

EditKind LabelSpace::kind(std::size_t index) const {
  if (index < vocab_size) return EditKind::kAdd;
  if (index == keep()) return EditKind::kKeep;
  if (index == del()) return EditKind::kDelete;
  if (index == stop()) return EditKind::kStop;
  throw std::out_of_range("label index out of range");
}

Example make_example(const SentencePair& pair, const EditProgram& program,
                     const Vocabulary& vocab) {
  const auto& x = pair.complex.tokens;
  const auto& y = pair.simple.tokens;
  auto d = validate(x, program);
  if (!d.valid() || d.padded_keeps != 0 || execute(x, program, false) != y) {
    throw DataError("program does not rewrite the complex sentence into the simple one (" +
                        d.describe() + ")",
                    pair.line);
  }
  LabelSpace space{vocab.size()};
  Example ex;
  ex.source = encode(pair.complex, vocab);
  ex.source_pos = encode_pos(pair.complex);
  ex.target = encode(pair.simple, vocab);
  for (const auto& l : program) {
    ex.kinds.push_back(l.kind());
    switch (l.kind()) {
      case EditKind::kAdd: ex.labels.push_back(static_cast<std::size_t>(vocab.id(l.word()))); break;
      case EditKind::kKeep: ex.labels.push_back(space.keep()); break;
      case EditKind::kDelete: ex.labels.push_back(space.del()); break;
      case EditKind::kStop: ex.labels.push_back(space.stop()); break;
    }
  }
  return ex;
}

std::vector<std::pair<std::size_t, std::size_t>> pointer_trajectory(
    std::span<const EditKind> kinds) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(kinds.size());
  std::size_t k = 0, j = 0;
  for (auto kind : kinds) {
    out.emplace_back(k, j);
    if (kind == EditKind::kKeep || kind == EditKind::kDelete) ++k;
    if (kind == EditKind::kKeep || kind == EditKind::kAdd) ++j;
  }
  return out;
}

template <typename Real>
Model<Real>::Model(ModelConfig config, std::uint64_t seed) : config_(std::move(config)) {
  config_.check();
  const auto& c = config_;
  word_embed_ = params_.add("word_embed", static_cast<ad::Index>(c.vocab_size),
                            static_cast<ad::Index>(c.word_dim));
  pos_embed_ = params_.add("pos_embed", static_cast<ad::Index>(c.pos_size),
                           static_cast<ad::Index>(c.pos_dim));
  edit_embed_ = params_.add("edit_embed", 3, static_cast<ad::Index>(c.word_dim));
  const std::size_t enc_in = c.word_dim + c.pos_dim;
  const std::size_t enc_hidden = c.bidirectional ? c.hidden / 2 : c.hidden;
  enc_fwd_ = make_lstm("encoder_fwd", enc_in, enc_hidden);
  if (c.bidirectional) enc_bwd_ = make_lstm("encoder_bwd", enc_in, enc_hidden);
  const std::size_t edit_in =
      3 * c.hidden + c.word_dim + (c.edit_prev_hidden_input ? c.hidden : 0);
  edit_ = make_lstm("edit", edit_in, c.hidden);
  interp_ = make_lstm("interpreter", c.word_dim, c.hidden);
  attn_ = params_.add("attention", static_cast<ad::Index>(c.hidden),
                      static_cast<ad::Index>(c.hidden));
  proj_w_ = params_.add("proj_w", static_cast<ad::Index>(c.proj_dim),
                        static_cast<ad::Index>(c.hidden));
  proj_b_ = params_.add("proj_b", static_cast<ad::Index>(c.proj_dim), 1);
  out_w_ = params_.add("out_w", static_cast<ad::Index>(c.num_labels()),
                       static_cast<ad::Index>(c.proj_dim));
  out_b_ = params_.add("out_b", static_cast<ad::Index>(c.num_labels()), 1);
  initialize(seed);
}

template <typename Real>
typename Model<Real>::Lstm Model<Real>::make_lstm(const std::string& name, std::size_t input,
                                                  std::size_t hidden) {
  Lstm cell;
  cell.hidden = hidden;
  cell.w = params_.add(name + "_w", static_cast<ad::Index>(4 * hidden),
                       static_cast<ad::Index>(input + hidden));
  cell.b = params_.add(name + "_b", static_cast<ad::Index>(4 * hidden), 1);
  return cell;
}

template <typename Real>
void Model<Real>::initialize(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto fill = [&](ad::ParamId id, double bound) {
    auto& m = params_[id].value;
    for (ad::Index j = 0; j < m.cols(); ++j) {
      for (ad::Index i = 0; i < m.rows(); ++i) {
        m(i, j) = static_cast<Real>(uniform(rng, -bound, bound));
      }
    }
  };
  fill(word_embed_, config_.embed_init);
  fill(pos_embed_, config_.embed_init);
  fill(edit_embed_, config_.embed_init);
  auto init_lstm = [&](const Lstm& cell) {
    fill(cell.w, 1.0 / std::sqrt(static_cast<double>(cell.hidden)));
    auto& b = params_[cell.b].value;
    b.setZero();
    // Gate order is input, forget, cell, output.
    b.block(static_cast<ad::Index>(cell.hidden), 0, static_cast<ad::Index>(cell.hidden), 1)
        .setOnes();
  };
  init_lstm(enc_fwd_);
  if (config_.bidirectional) init_lstm(enc_bwd_);
  init_lstm(edit_);
  init_lstm(interp_);
  auto fan = [&](ad::ParamId id) {
    const auto& m = params_[id].value;
    return std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()));
  };
  fill(attn_, fan(attn_));
  fill(proj_w_, fan(proj_w_));
  fill(out_w_, fan(out_w_));
  params_[proj_b_].value.setZero();
  params_[out_b_].value.setZero();
}

template <typename Real>
typename Model<Real>::LstmState Model<Real>::lstm_step(Tape& tape, const Lstm& cell, Var x,
                                                       LstmState s) const {
  const auto h = static_cast<ad::Index>(cell.hidden);
  Var gates = tape.affine(cell.w, cell.b, tape.concat({x, s.h}));
  Var i = tape.sigmoid(tape.slice(gates, 0, h));
  Var f = tape.sigmoid(tape.slice(gates, h, h));
  Var g = tape.tanh(tape.slice(gates, 2 * h, h));
  Var o = tape.sigmoid(tape.slice(gates, 3 * h, h));
  Var c = tape.add(tape.mul(f, s.c), tape.mul(i, g));
  return {tape.mul(o, tape.tanh(c)), c};
}

template <typename Real>
std::vector<ad::Var> Model<Real>::encode(Tape& tape, std::span<const TokenId> words,
                                         std::span<const TokenId> tags,
                                         std::mt19937_64* dropout_rng) const {
  if (words.empty() || words.size() != tags.size()) {
    throw std::invalid_argument("encode: need equal, non-zero numbers of words and tags");
  }
  const std::size_t n = words.size();
  std::vector<Var> inputs;
  inputs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    inputs.push_back(tape.concat({tape.embed(word_embed_, words[i]), tape.embed(pos_embed_, tags[i])}));
  }
  auto run = [&](const Lstm& cell, bool reverse) {
    std::vector<Var> out(n);
    LstmState s{tape.zeros(static_cast<ad::Index>(cell.hidden)),
                tape.zeros(static_cast<ad::Index>(cell.hidden))};
    for (std::size_t step = 0; step < n; ++step) {
      const std::size_t i = reverse ? n - 1 - step : step;
      s = lstm_step(tape, cell, inputs[i], s);
      out[i] = s.h;
    }
    return out;
  };
  std::vector<Var> states = run(enc_fwd_, false);
  if (config_.bidirectional) {
    auto bwd = run(enc_bwd_, true);
    for (std::size_t i = 0; i < n; ++i) states[i] = tape.concat({states[i], bwd[i]});
  }
  if (dropout_rng && config_.dropout > 0.0) {
    const double keep = 1.0 - config_.dropout;
    for (auto& s : states) {
      V m(static_cast<ad::Index>(config_.hidden));
      for (ad::Index i = 0; i < m.size(); ++i) {
        m(i) = uniform01(*dropout_rng) < keep ? static_cast<Real>(1.0 / keep) : Real(0);
      }
      s = tape.mask(s, m);
    }
  }
  return states;
}

template <typename Real>
std::pair<ad::Var, ad::Var> Model<Real>::attention(Tape& tape, std::span<const Var> encoded,
                                                   std::size_t pointer) const {
  const Var query = encoded[std::min(pointer, encoded.size() - 1)];
  // score_j = query^T A h_j, computed as (A^T query) . h_j
  const Var projected = tape.linear_transposed(attn_, query);
  std::vector<Var> scores;
  scores.reserve(encoded.size());
  for (auto h : encoded) scores.push_back(tape.dot(projected, h));
  const Var weights = tape.softmax(tape.concat(scores));
  return {tape.weighted_sum(weights, encoded), weights};
}

template <typename Real>
ad::Var Model<Real>::label_input(Tape& tape, std::optional<std::size_t> prev_label) const {
  if (!prev_label) return tape.embed(word_embed_, Vocabulary::kPad);
  const auto space = labels();
  if (*prev_label < space.vocab_size) return tape.embed(word_embed_, static_cast<ad::Index>(*prev_label));
  return tape.embed(edit_embed_, static_cast<ad::Index>(*prev_label - space.vocab_size));
}

template <typename Real>
typename Model<Real>::LstmState Model<Real>::initial_state(Tape& tape) const {
  const auto h = static_cast<ad::Index>(config_.hidden);
  return {tape.zeros(h), tape.zeros(h)};
}

template <typename Real>
typename Model<Real>::LstmState Model<Real>::interpreter_start(Tape& tape) const {
  return interpreter_step(tape, initial_state(tape), Vocabulary::kPad);
}

template <typename Real>
typename Model<Real>::LstmState Model<Real>::interpreter_step(Tape& tape, LstmState state,
                                                              TokenId word) const {
  return lstm_step(tape, interp_, tape.embed(word_embed_, word), state);
}

template <typename Real>
std::pair<ad::Var, typename Model<Real>::LstmState> Model<Real>::decode_step(
    Tape& tape, std::span<const Var> encoded, std::size_t pointer,
    std::optional<std::size_t> prev_label, Var interpreter_h, LstmState edit_state) const {
  const Var at_pointer = encoded[std::min(pointer, encoded.size() - 1)];
  const Var context = attention(tape, encoded, pointer).first;
  const Var prev = label_input(tape, prev_label);
  const Var input = config_.edit_prev_hidden_input
                        ? tape.concat({at_pointer, context, prev, interpreter_h, edit_state.h})
                        : tape.concat({at_pointer, context, prev, interpreter_h});
  LstmState next = lstm_step(tape, edit_, input, edit_state);
  const Var hidden = tape.tanh(tape.affine(proj_w_, proj_b_, next.h));
  return {tape.affine(out_w_, out_b_, hidden), next};
}

namespace {

template <typename Real, typename Fn>
void teacher_force(const Model<Real>& model, typename Model<Real>::Tape& tape, const Example& ex,
                   std::mt19937_64* dropout_rng, Fn&& on_step) {
  using M = Model<Real>;
  if (ex.labels.empty() || ex.labels.size() != ex.kinds.size()) {
    throw std::invalid_argument("example has no labels");
  }
  const auto encoded = model.encode(tape, ex.source, ex.source_pos, dropout_rng);
  // Interpreter states after consuming the gold prefix y_1..y_j, j = 0..|y|.
  std::vector<typename M::LstmState> interp;
  interp.reserve(ex.target.size() + 1);
  interp.push_back(model.interpreter_start(tape));
  const auto trajectory = pointer_trajectory(ex.kinds);
  std::size_t needed = 0;
  for (auto [k, j] : trajectory) needed = std::max(needed, j);
  for (std::size_t j = 0; j < needed; ++j) {
    interp.push_back(model.interpreter_step(tape, interp.back(), ex.target.at(j)));
  }
  auto edit = model.initial_state(tape);
  std::optional<std::size_t> prev;
  for (std::size_t t = 0; t < ex.labels.size(); ++t) {
    const auto [k, j] = trajectory[t];
    auto [logits, next] = model.decode_step(tape, encoded, k, prev, interp[j].h, edit);
    on_step(t, logits);
    edit = next;
    prev = ex.labels[t];
  }
}

}  // namespace

template <typename Real>
ad::Var Model<Real>::loss(Tape& tape, const Example& ex, const LabelStats& weights,
                          std::mt19937_64* dropout_rng) const {
  std::vector<Var> terms;
  std::vector<Real> coeffs;
  terms.reserve(ex.labels.size());
  teacher_force(*this, tape, ex, dropout_rng, [&](std::size_t t, Var logits) {
    terms.push_back(tape.nll(logits, static_cast<ad::Index>(ex.labels[t])));
    coeffs.push_back(static_cast<Real>(weights.weight(ex.kinds[t])));
  });
  return tape.linear_combination(terms, coeffs);
}

template <typename Real>
std::vector<double> Model<Real>::step_nll(const Example& ex) const {
  Tape tape(params_);
  std::vector<double> out;
  teacher_force(*this, tape, ex, nullptr, [&](std::size_t t, Var logits) {
    out.push_back(-static_cast<double>(
        Tape::log_softmax_at(tape.value(logits), static_cast<ad::Index>(ex.labels[t]))));
  });
  return out;
}

template <typename Real>
std::vector<std::size_t> Model<Real>::teacher_forced_predictions(const Example& ex) const {
  Tape tape(params_);
  std::vector<std::size_t> out;
  teacher_force(*this, tape, ex, nullptr, [&](std::size_t, Var logits) {
    ad::Index best;
    tape.value(logits).maxCoeff(&best);
    out.push_back(static_cast<std::size_t>(best));
  });
  return out;
}

template <typename Real>
std::vector<typename Model<Real>::V> Model<Real>::teacher_forced_distributions(
    const Example& ex) const {
  Tape tape(params_);
  std::vector<V> out;
  teacher_force(*this, tape, ex, nullptr,
                [&](std::size_t, Var logits) { out.push_back(Tape::softmax_of(tape.value(logits))); });
  return out;
}

template <typename Real>
Inference Model<Real>::infer(const Sentence& source, const Vocabulary& vocab,
                             const DecodeConfig& config) const {
  const auto tags = encode_pos(source);
  return infer(source.tokens, tags, vocab, config);
}

namespace {

template <typename Real>
class NeuralProgrammer final : public Programmer {
 public:
  using M = Model<Real>;

  NeuralProgrammer(const M& model, std::span<const TokenId> words, std::span<const TokenId> tags)
      : model_(model), tape_(model.params()) {
    encoded_ = model.encode(tape_, words, tags, nullptr);
    interp_ = model.interpreter_start(tape_);
    edit_ = model.initial_state(tape_);
  }

  Eigen::VectorXd next_scores(std::size_t pointer) override {
    auto [logits, next] = model_.decode_step(tape_, encoded_, pointer, prev_, interp_.h, edit_);
    edit_ = next;
    return tape_.value(logits).template cast<double>();
  }

  void advance(std::size_t label, std::optional<TokenId> emitted) override {
    prev_ = label;
    if (emitted) interp_ = model_.interpreter_step(tape_, interp_, *emitted);
  }

 private:
  const M& model_;
  typename M::Tape tape_;
  std::vector<ad::Var> encoded_;
  typename M::LstmState interp_{}, edit_{};
  std::optional<std::size_t> prev_;
};

}  // namespace

Inference greedy_decode(Programmer& programmer, std::span<const std::string> tokens,
                        const Vocabulary& vocab, const DecodeConfig& config) {
  if (tokens.empty()) throw std::invalid_argument("cannot simplify an empty sentence");
  const LabelSpace space{vocab.size()};
  const std::size_t n = tokens.size();
  const std::size_t budget = config.add_budget(n);
  constexpr double masked = -std::numeric_limits<double>::infinity();

  Inference result;
  ExecState state;
  std::size_t adds = 0;
  while (true) {
    const bool can_consume = state.pointer < n;
    const bool can_add = adds < budget;
    std::size_t choice = space.stop();
    if (can_consume || can_add) {
      Eigen::VectorXd scores = programmer.next_scores(state.pointer);
      if (static_cast<std::size_t>(scores.size()) != space.size()) {
        throw std::invalid_argument("programmer returned scores of the wrong size");
      }
      for (auto& v : scores) {
        if (std::isnan(v)) v = masked;
      }
      if (!can_consume) {
        scores(static_cast<Eigen::Index>(space.keep())) = masked;
        scores(static_cast<Eigen::Index>(space.del())) = masked;
      }
      if (!can_add) {
        scores.head(static_cast<Eigen::Index>(space.vocab_size)).setConstant(masked);
      } else {
        for (TokenId r = 0; r < Vocabulary::kNumReserved; ++r) {
          if (r != Vocabulary::kUnk || !config.allow_unk) scores(r) = masked;
        }
      }
      // First maximum among unmasked labels wins. If everything is masked
      // (a NaN STOP score included), STOP is forced.
      std::optional<Eigen::Index> best;
      for (Eigen::Index i = 0; i < scores.size(); ++i) {
        if (scores(i) == masked) continue;
        if (!best || scores(i) > scores(*best)) best = i;
      }
      if (best) choice = static_cast<std::size_t>(*best);
    }

    const EditKind kind = space.kind(choice);
    std::optional<TokenId> emitted;
    EditLabel label = EditLabel::stop();
    switch (kind) {
      case EditKind::kAdd:
        label = EditLabel::add(vocab.token(static_cast<TokenId>(choice)));
        emitted = static_cast<TokenId>(choice);
        ++adds;
        break;
      case EditKind::kKeep:
        label = EditLabel::keep();
        emitted = vocab.id(tokens[state.pointer]);
        break;
      case EditKind::kDelete:
        label = EditLabel::del();
        break;
      case EditKind::kStop:
        break;
    }
    apply(state, tokens, label);
    result.program.push_back(std::move(label));
    if (state.halted) break;
    programmer.advance(choice, emitted);
  }
  result.steps = state.step;
  result.output = std::move(state.output);
  if (config.pad_on_early_stop) {
    for (auto k = state.pointer; k < n; ++k) result.output.push_back(tokens[k]);
  }
  return result;
}

template <typename Real>
Inference Model<Real>::infer(std::span<const std::string> tokens, std::span<const TokenId> tags,
                             const Vocabulary& vocab, const DecodeConfig& config) const {
  if (vocab.size() != config_.vocab_size) {
    throw std::invalid_argument("vocabulary size does not match the model");
  }
  if (tokens.empty()) throw std::invalid_argument("cannot simplify an empty sentence");
  const auto words = editnts::encode(tokens, vocab);
  NeuralProgrammer<Real> programmer(*this, words, tags);
  return greedy_decode(programmer, tokens, vocab, config);
}

template class Model<float>;
template class Model<double>;

}  // namespace editnts
