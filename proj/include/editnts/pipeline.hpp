#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "editnts/corpus.hpp"
#include "editnts/metrics.hpp"
#include "editnts/model.hpp"
#include "editnts/oracle.hpp"
#include "editnts/trainer.hpp"

namespace editnts {

// Label construction

struct LabelBuild {
  std::vector<SentencePair> pairs;    // non-identical pairs in corpus order
  std::vector<EditProgram> programs;  // one per entry of `pairs`
  std::vector<std::size_t> skipped;   // lines of identical pairs
  KindCounts counts;
};

LabelBuild build_labels(std::span<const SentencePair> pairs, TieBreak tie_break = TieBreak::kAddFirst);

/// Label counts as a table with KEEP, DELETE, ADD, STOP columns, one row per
/// named corpus.
std::string format_label_table(std::span<const std::pair<std::string, KindCounts>> rows);

/// Drops identical pairs, the ones build_labels skips.
std::vector<SentencePair> non_identical(std::span<const SentencePair> pairs);

/// Loads a corpus and throws DataError at the first bad row.
std::vector<SentencePair> load_corpus_strict(const std::filesystem::path& path,
                                             CorpusFormat format = CorpusFormat::kTsv);

/// Reads a program file and pairs it with `pairs` (already filtered with
/// non_identical). Throws DataError on a count mismatch or a program that does
/// not rewrite its complex sentence into the simple one.
std::vector<EditProgram> load_programs_for(const std::filesystem::path& path,
                                           std::span<const SentencePair> pairs);

// Loss weights

/// Multipliers on the ADD, KEEP and DELETE loss weights, written A:K:D.
struct WeightRatio {
  double add = 1.0;
  double keep = 1.0;
  double del = 1.0;

  static WeightRatio parse(std::string_view text);  // throws std::invalid_argument
  std::string to_string() const;
  bool operator==(const WeightRatio&) const = default;
};

// Training runs

struct RunConfig {
  std::string corpus;
  std::string programs;
  std::string corpus_digest;  // FNV-1a of the corpus and program files
  std::size_t vocab_size = 30000;
  bool dummy_pos = false;
  double dev_fraction = 0.1;
  WeightRatio ratio;
  ModelConfig model;  // vocab_size is filled in from the built vocabulary
  TrainConfig train;

  std::string to_json() const;
  static RunConfig from_json(std::string_view json);
  /// Hash of everything that determines the trained weights except the epoch
  /// count, so a longer run of the same config resumes in the same directory.
  std::string hash() const;
  std::string run_name() const { return "run-" + hash(); }
};

/// Train/dev examples built from aligned pairs and programs.
struct Dataset {
  Vocabulary vocab;
  std::vector<SentencePair> train_pairs, dev_pairs;
  std::vector<EditProgram> train_programs;
  std::vector<Example> train, dev;
};

/// Splits off round(dev_fraction * n) pairs (seed-determined, at least one
/// pair stays in training), builds the vocabulary from the training side and
/// encodes both sets. With `dummy_pos` every tag becomes the unknown tag,
/// otherwise untagged pairs are a DataError.
Dataset make_dataset(std::span<const SentencePair> pairs, std::span<const EditProgram> programs,
                     std::size_t vocab_size, double dev_fraction, std::uint64_t seed,
                     bool dummy_pos);

/// Inverse-frequency weights over the training programs, scaled by `ratio`.
LabelStats loss_weights(std::span<const EditProgram> programs, const WeightRatio& ratio);

struct TrainRun {
  std::filesystem::path dir;
  std::size_t resumed_from = 0;  // last epoch found on disk, 0 for a fresh run
  std::vector<EpochLog> logs;    // epochs trained by this call
};

/// Trains into `root/run-<hash>`. The directory holds config.json, vocab.txt,
/// train_log.tsv and per-epoch model and optimizer checkpoints. If it already
/// has checkpoints, training resumes after the latest one.
TrainRun train_run(const RunConfig& config, const std::filesystem::path& root, std::ostream& log);

/// Path of the newest epoch-NNNN.ckpt in a run directory, if any.
std::optional<std::filesystem::path> latest_checkpoint(const std::filesystem::path& run_dir);

// Inference

/// Replays a fixed program; masked or unknown labels make it fall back to the
/// decoder's forced choices.
class ReplayProgrammer : public Programmer {
 public:
  ReplayProgrammer(EditProgram program, const Vocabulary& vocab);
  Eigen::VectorXd next_scores(std::size_t pointer) override;
  void advance(std::size_t label, std::optional<TokenId> emitted) override;

 private:
  EditProgram program_;
  const Vocabulary& vocab_;
  std::size_t t_ = 0;
};

struct LoadedModel {
  Model<float> model;
  Vocabulary vocab;
};

/// Accepts a checkpoint file or a run directory (newest checkpoint). The
/// vocabulary comes from `vocab_path`, or vocab.txt next to the checkpoint.
/// Throws CheckpointError when the vocabulary does not fit the model.
LoadedModel load_for_inference(const std::filesystem::path& checkpoint,
                               const std::filesystem::path& vocab_path = {});

/// Reads one sentence per line (`tokens` or `tokens<TAB>tags`), writes one
/// output per line and, if `trace` is set, one program per line.
std::size_t infer_stream(const Model<float>& model, const Vocabulary& vocab, std::istream& in,
                         std::ostream& out, std::ostream* trace, const DecodeConfig& decode,
                         bool dummy_pos);

// Evaluation

/// Line-aligned source, output and reference files.
std::vector<metrics::EvalInstance> load_eval_files(const std::filesystem::path& source,
                                                   const std::filesystem::path& output,
                                                   std::span<const std::filesystem::path> refs);

// Controllability sweep

struct ControlRow {
  WeightRatio ratio;
  metrics::LengthNovelty stats;
  double dev_accuracy = 0.0;
};

/// Trains one model per ratio on the same split and seed, decodes the dev
/// sources (training sources when there is no dev split) and reports output
/// length and novelty. Needs at least two ratios.
std::vector<ControlRow> control_sweep(const Dataset& data, std::span<const WeightRatio> ratios,
                                      const ModelConfig& model, const TrainConfig& train,
                                      std::ostream* log = nullptr);

std::string format_control_table(std::span<const ControlRow> rows);

}  // namespace editnts
