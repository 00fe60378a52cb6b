#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "editnts/corpus.hpp"

namespace editnts::metrics {

struct EvalInstance {
  Tokens source;
  Tokens output;
  std::vector<Tokens> references;  // at least one
};

/// How SARI scores the delete operation.
enum class DeleteMode {
  kF1,         // F1 of precision and recall, like add and keep
  kPrecision,  // precision only, as in the original SARI definition
};

/// Score of an operation at one n-gram order when its candidate set and its
/// target set are both empty.
enum class EmptyConvention {
  kVacuousOne,  // perfect (1)
  kZero,        // 0, as in the reference SARI script
};

enum class Aggregation {
  kMacro,  // average of per-instance scores
  kMicro,  // pool n-gram statistics over the corpus before scoring
};

struct SariOptions {
  DeleteMode delete_mode = DeleteMode::kF1;
  EmptyConvention empty = EmptyConvention::kVacuousOne;
  Aggregation aggregation = Aggregation::kMacro;
  int max_order = 4;
};

/// Operation scores in [0, 100]; sari is their mean.
struct SariScore {
  double sari = 0.0;
  double add = 0.0;
  double del = 0.0;
  double keep = 0.0;
};

/// Fractional-count statistics of one operation at one n-gram order.
struct OperationCounts {
  double precision_num = 0.0;
  double precision_den = 0.0;  // number of candidate n-grams
  double recall_num = 0.0;
  double recall_den = 0.0;     // number of target n-grams

  OperationCounts& operator+=(const OperationCounts& o);
};

struct NgramCounts {
  OperationCounts add, del, keep;
};

/// Add/delete/keep statistics of one instance at n-gram order `n`.
NgramCounts ngram_counts(const EvalInstance& instance, int n);

/// Sentence-level SARI.
SariScore sari_sentence(const EvalInstance& instance, const SariOptions& options = {});

/// Corpus-level SARI. Throws std::invalid_argument on an empty list or an
/// instance without references.
SariScore sari(std::span<const EvalInstance> instances, const SariOptions& options = {});

/// Vowel-group syllable count: runs of a/e/i/o/u/y, minus a silent final 'e'
/// (except "-le"), at least 1.
int count_syllables(std::string_view word);

/// False for tokens without letters or digits (punctuation).
bool is_word(std::string_view token);

/// Flesch-Kincaid grade level over the given sentences, one sentence each.
double fkgl(std::span<const Tokens> sentences);

/// Percentage of instances whose output equals the source.
double pct_unchanged(std::span<const EvalInstance> instances);

struct LengthNovelty {
  double avg_length = 0.0;
  double pct_copied = 0.0;  // output tokens that occur in the source
  double pct_novel = 0.0;   // output tokens absent from the source
};

/// Averages over instances; empty outputs count toward avg_length only.
LengthNovelty length_and_novelty_stats(std::span<const EvalInstance> instances);

struct EvalReport {
  SariScore sari;
  double fkgl = 0.0;
  double pct_unchanged = 0.0;
  std::size_t num_instances = 0;
  SariOptions options;

  /// `SARI 31.41 | add 1.84 del 85.36 keep 7.04 | FKGL 3.40 | %unc 4.27`
  std::string summary() const;
  /// key=value lines.
  std::string key_values() const;
};

EvalReport evaluate(std::span<const EvalInstance> instances, const SariOptions& options = {});

}  // namespace editnts::metrics
