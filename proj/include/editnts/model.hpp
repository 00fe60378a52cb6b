#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "editnts/autodiff.hpp"
#include "editnts/corpus.hpp"
#include "editnts/edit_label.hpp"
#include "editnts/oracle.hpp"

namespace editnts {

/// Architecture hyperparameters. Defaults are the full-size model.
struct ModelConfig {
  std::size_t vocab_size = 0;  // including the reserved ids
  std::size_t word_dim = 100;
  std::size_t pos_dim = 30;
  std::size_t pos_size = PosTagSet::kTableSize;
  std::size_t hidden = 200;      // encoder output, edit and interpreter cells
  std::size_t proj_dim = 200;    // tanh bottleneck before the label softmax
  bool bidirectional = true;     // encoder halves of hidden/2 each when set
  bool edit_prev_hidden_input = false;  // also feed h_edit(t-1) as an explicit input
  double dropout = 0.3;          // on encoder outputs, training only
  double embed_init = 0.1;

  std::size_t num_labels() const { return vocab_size + 3; }
  void check() const;
  bool operator==(const ModelConfig&) const = default;
};

/// Output layout over vocab_size + 3 entries: ADD(w) for every vocabulary id,
/// then KEEP, DELETE, STOP.
struct LabelSpace {
  std::size_t vocab_size;

  std::size_t keep() const { return vocab_size; }
  std::size_t del() const { return vocab_size + 1; }
  std::size_t stop() const { return vocab_size + 2; }
  std::size_t size() const { return vocab_size + 3; }
  EditKind kind(std::size_t index) const;
};

/// A training pair in id form, with its oracle program.
struct Example {
  std::vector<TokenId> source;
  std::vector<TokenId> source_pos;
  std::vector<TokenId> target;       // ids of the simple sentence
  std::vector<std::size_t> labels;   // indices into LabelSpace
  std::vector<EditKind> kinds;
};

/// Throws DataError unless executing `program` on the complex side gives the
/// simple side. Missing tags become PosTagSet::kUnknown.
Example make_example(const SentencePair& pair, const EditProgram& program, const Vocabulary& vocab);

/// Edit pointer k_t and output length j_(t-1) seen by each step of a gold
/// program (teacher forcing).
std::vector<std::pair<std::size_t, std::size_t>> pointer_trajectory(std::span<const EditKind> kinds);

struct DecodeConfig {
  std::optional<std::size_t> max_adds;  // default 2|x| + 10
  bool pad_on_early_stop = true;
  bool allow_unk = false;  // whether ADD(UNK) may be emitted

  std::size_t add_budget(std::size_t source_len) const {
    return max_adds.value_or(2 * source_len + 10);
  }
};

struct Inference {
  EditProgram program;
  Tokens output;
  std::size_t steps = 0;
};

/// Source of label scores for greedy decoding.
class Programmer {
 public:
  virtual ~Programmer() = default;
  /// Unnormalized scores over the label space for the next step.
  virtual Eigen::VectorXd next_scores(std::size_t pointer) = 0;
  /// Reports the chosen label and the token id it wrote to the output, if any.
  virtual void advance(std::size_t label, std::optional<TokenId> emitted) = 0;
};

/// Greedy constrained decoding. KEEP/DELETE are masked once the pointer is
/// past the source, ADD once the budget is used up (and always for reserved
/// ids); decoding ends on STOP or when nothing but STOP is left, so it takes
/// at most |x| + budget + 1 steps.
Inference greedy_decode(Programmer& programmer, std::span<const std::string> tokens,
                        const Vocabulary& vocab, const DecodeConfig& config = {});

template <typename Real>
class Model {
 public:
  using Tape = ad::Tape<Real>;
  using Var = ad::Var;
  using V = ad::Vec<Real>;

  struct LstmState {
    Var h, c;
  };

  /// Builds and randomly initializes the parameters.
  Model(ModelConfig config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  LabelSpace labels() const { return {config_.vocab_size}; }
  ad::ParameterSet<Real>& params() { return params_; }
  const ad::ParameterSet<Real>& params() const { return params_; }

  /// Encoder states, one per source token. `dropout_rng` null disables dropout.
  std::vector<Var> encode(Tape& tape, std::span<const TokenId> words, std::span<const TokenId> tags,
                          std::mt19937_64* dropout_rng = nullptr) const;

  /// Soft attention with the encoder state under the edit pointer as query.
  /// A pointer at the end of the source uses the last state. Returns
  /// (context, weights).
  std::pair<Var, Var> attention(Tape& tape, std::span<const Var> encoded, std::size_t pointer) const;

  /// Input for the previous label: a word embedding for ADD(w), an edit
  /// embedding for KEEP/DELETE/STOP, the start symbol at t = 1.
  Var label_input(Tape& tape, std::optional<std::size_t> prev_label) const;

  LstmState initial_state(Tape& tape) const;
  LstmState interpreter_start(Tape& tape) const;
  LstmState interpreter_step(Tape& tape, LstmState state, TokenId word) const;

  /// One programmer step. Returns (logits over the label space, new edit state).
  std::pair<Var, LstmState> decode_step(Tape& tape, std::span<const Var> encoded,
                                        std::size_t pointer, std::optional<std::size_t> prev_label,
                                        Var interpreter_h, LstmState edit_state) const;

  /// sum_t weight(z_t) * -log P(z_t) under teacher forcing.
  Var loss(Tape& tape, const Example& ex, const LabelStats& weights,
           std::mt19937_64* dropout_rng = nullptr) const;

  /// Unweighted per-step negative log-likelihoods (no dropout).
  std::vector<double> step_nll(const Example& ex) const;

  /// Teacher-forced argmax predictions for each gold step (no dropout).
  std::vector<std::size_t> teacher_forced_predictions(const Example& ex) const;

  /// Label distribution at every teacher-forced step (no dropout).
  std::vector<V> teacher_forced_distributions(const Example& ex) const;

  /// Greedy decoding with this model as the programmer.
  Inference infer(const Sentence& source, const Vocabulary& vocab,
                  const DecodeConfig& config = {}) const;
  Inference infer(std::span<const std::string> tokens, std::span<const TokenId> tags,
                  const Vocabulary& vocab, const DecodeConfig& config = {}) const;

 private:
  struct Lstm {
    ad::ParamId w, b;
    std::size_t hidden;
  };

  Lstm make_lstm(const std::string& name, std::size_t input, std::size_t hidden);
  LstmState lstm_step(Tape& tape, const Lstm& cell, Var x, LstmState s) const;
  void initialize(std::uint64_t seed);

  ModelConfig config_;
  ad::ParameterSet<Real> params_;
  ad::ParamId word_embed_, pos_embed_, edit_embed_;
  Lstm enc_fwd_{}, enc_bwd_{}, edit_{}, interp_{};
  ad::ParamId attn_, proj_w_, proj_b_, out_w_, out_b_;
};

extern template class Model<float>;
extern template class Model<double>;

}  // namespace editnts
