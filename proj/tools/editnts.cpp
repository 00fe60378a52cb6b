// editnts: label construction, training, inference, evaluation and control
// sweeps for the edit-based simplifier.
//
// Exit codes: 0 success, 1 usage, 2 data error, 3 numeric failure.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "editnts/checkpoint.hpp"
#include "editnts/errors.hpp"
#include "editnts/executor.hpp"
#include "editnts/gradcheck.hpp"
#include "editnts/metrics.hpp"
#include "editnts/pipeline.hpp"
#include "editnts/toy_corpus.hpp"

namespace fs = std::filesystem;
using namespace editnts;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kNumeric = 3;

struct ModelFlags {
  ModelConfig model;
  TrainConfig train;
  std::size_t vocab_size = 30000;
  double dev_fraction = 0.1;
  bool dummy_pos = false;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--vocab-size", vocab_size, "Vocabulary limit")->capture_default_str();
    cmd->add_option("--word-dim", model.word_dim)->capture_default_str();
    cmd->add_option("--pos-dim", model.pos_dim)->capture_default_str();
    cmd->add_option("--hidden", model.hidden)->capture_default_str();
    cmd->add_option("--proj-dim", model.proj_dim)->capture_default_str();
    cmd->add_option("--dropout", model.dropout)->capture_default_str();
    cmd->add_flag("!--unidirectional", model.bidirectional, "Forward-only encoder");
    cmd->add_flag("--edit-prev-input", model.edit_prev_hidden_input,
                  "Feed the previous edit state as an explicit input");
    cmd->add_option("--lr", train.learning_rate)->capture_default_str();
    cmd->add_option("--weight-decay", train.weight_decay)->capture_default_str();
    cmd->add_option("--clip", train.clip_norm)->capture_default_str();
    cmd->add_option("--batch", train.batch_size)->capture_default_str();
    cmd->add_option("--epochs", train.epochs)->capture_default_str();
    cmd->add_option("--seed", train.seed)->capture_default_str();
    cmd->add_option("--dev-fraction", dev_fraction)->capture_default_str();
    cmd->add_flag("--dummy-pos", dummy_pos, "Give every token the unknown POS tag");
  }
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

CorpusFormat parse_format(const std::string& s) {
  return s == "parallel" ? CorpusFormat::kParallelFiles : CorpusFormat::kTsv;
}

void run_f64_check(const ModelFlags& flags, std::span<const SentencePair> pairs,
                   std::span<const EditProgram> programs) {
  // Exactness does not depend on width, so the check runs on a narrow copy of
  // the architecture with the real vocabulary and data.
  auto data = make_dataset(pairs.first(std::min<std::size_t>(pairs.size(), 3)),
                           programs.first(std::min<std::size_t>(programs.size(), 3)),
                           flags.vocab_size, 0.0, flags.train.seed, flags.dummy_pos);
  ModelConfig mc = flags.model;
  mc.vocab_size = data.vocab.size();
  mc.word_dim = 6;
  mc.pos_dim = 4;
  mc.hidden = 8;
  mc.proj_dim = 8;
  // With 0.1-scale embeddings the attention gradient is around 1e-6 and the
  // finite difference is mostly roundoff; unit scale makes it measurable.
  mc.embed_init = 1.0;
  Model<double> model(mc, flags.train.seed);
  const auto checks = gradient_check(model, std::span(data.train).first(1),
                                     label_statistics(data.train_programs));
  const double worst = max_relative_error(checks);
  std::cerr << "f64 gradient check: max relative error " << worst << " over " << checks.size()
            << " tensors\n";
  if (!(worst < 1e-4)) {
    for (const auto& c : checks) std::cerr << "  " << c.name << ' ' << c.relative_error << '\n';
    throw NumericError("gradient check failed");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Edit-program sentence simplification"};
  app.require_subcommand(1);

  // build-labels
  std::string corpus, programs_path, out_path, format = "tsv", name = "corpus";
  auto* build = app.add_subcommand("build-labels", "Construct oracle edit programs for a corpus");
  build->add_option("--corpus", corpus, "Corpus TSV (or prefix with --format parallel)")->required();
  build->add_option("--format", format)->check(CLI::IsMember({"tsv", "parallel"}));
  build->add_option("--out", out_path, "Program file to write")->required();
  build->add_option("--name", name, "Row label in the statistics table");
  bool delete_first = false;
  build->add_flag("--delete-first", delete_first, "Prefer DELETE over ADD on ties (ablation)");

  // stats
  auto* stats = app.add_subcommand("stats", "Label counts and loss weights");
  stats->add_option("--corpus", corpus)->required();
  stats->add_option("--format", format)->check(CLI::IsMember({"tsv", "parallel"}));
  stats->add_option("--programs", programs_path, "Count an existing program file instead");
  stats->add_option("--name", name);

  // train
  ModelFlags flags;
  std::string ratio_text = "1:1:1", runs_dir = "runs";
  bool f64_check = false;
  auto* train = app.add_subcommand("train", "Train a model into a run directory");
  train->add_option("--corpus", corpus)->required();
  train->add_option("--programs", programs_path)->required();
  train->add_option("--out-dir", runs_dir, "Parent of run directories")->capture_default_str();
  train->add_option("--ratio", ratio_text, "Loss weight multipliers A:K:D")->capture_default_str();
  train->add_flag("--f64-check", f64_check, "Finite-difference gradient check before training");
  flags.add_to(train);

  // infer
  std::string checkpoint, input, vocab_path, trace_path;
  bool no_pad = false, allow_unk = false;
  std::optional<std::size_t> max_adds;
  auto* infer = app.add_subcommand("infer", "Simplify one sentence per line");
  infer->add_option("--checkpoint", checkpoint, "Checkpoint file or run directory")->required();
  infer->add_option("--input", input)->required();
  infer->add_option("--output", out_path)->required();
  infer->add_option("--vocab", vocab_path, "Defaults to vocab.txt next to the checkpoint");
  infer->add_option("--trace", trace_path, "Write the edit program of every sentence here");
  infer->add_flag("--no-pad", no_pad, "Drop the unread suffix on early STOP");
  infer->add_flag("--allow-unk", allow_unk, "Allow ADD of the unknown token");
  infer->add_option("--max-adds", max_adds, "ADD budget (default 2|x|+10)");
  bool infer_dummy_pos = false;
  infer->add_flag("--dummy-pos", infer_dummy_pos);

  // evaluate
  std::string source, delete_mode = "f1", empty = "vacuous", aggregation = "macro", report_path;
  std::vector<std::string> refs;
  auto* eval = app.add_subcommand("evaluate", "SARI, FKGL and %unchanged");
  eval->add_option("--source", source)->required();
  eval->add_option("--output", out_path)->required();
  eval->add_option("--refs", refs)->required()->expected(1, -1);
  eval->add_option("--delete-mode", delete_mode)->check(CLI::IsMember({"f1", "precision"}));
  eval->add_option("--empty", empty, "Score of an empty-vs-empty operation")
      ->check(CLI::IsMember({"vacuous", "zero"}));
  eval->add_option("--aggregation", aggregation)->check(CLI::IsMember({"macro", "micro"}));
  eval->add_option("--report", report_path, "Also write key=value lines here");

  // control-sweep
  std::vector<std::string> ratios;
  auto* sweep = app.add_subcommand("control-sweep", "Train one model per loss ratio");
  sweep->add_option("--corpus", corpus)->required();
  sweep->add_option("--programs", programs_path)->required();
  sweep->add_option("--ratio", ratios, "A:K:D, repeat for each row")->required();
  ModelFlags sweep_flags;
  sweep_flags.add_to(sweep);

  // execute / validate
  bool trace = false;
  auto* exec = app.add_subcommand("execute", "Run programs on the complex side of a corpus");
  exec->add_option("--corpus", corpus)->required();
  exec->add_option("--programs", programs_path)->required();
  exec->add_flag("--trace", trace, "Print every step as `t label k |output|`");
  exec->add_flag("--no-pad", no_pad);
  auto* val = app.add_subcommand("validate", "Check programs against a corpus");
  val->add_option("--corpus", corpus)->required();
  val->add_option("--programs", programs_path)->required();

  // toy-corpus
  ToyCorpusOptions toy;
  auto* toy_cmd = app.add_subcommand("toy-corpus", "Write the synthetic tagged corpus");
  toy_cmd->add_option("--out", out_path)->required();
  toy_cmd->add_option("--pairs", toy.pairs)->capture_default_str();
  toy_cmd->add_option("--seed", toy.seed)->capture_default_str();
  toy_cmd->add_option("--drop-adjective", toy.drop_adjective)->capture_default_str();
  toy_cmd->add_option("--drop-adverb", toy.drop_adverb)->capture_default_str();
  toy_cmd->add_option("--swap-verb", toy.swap_verb)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsage;
  }

  try {
    if (*build) {
      const auto pairs = load_corpus_strict(corpus, parse_format(format));
      auto labels = build_labels(pairs, delete_first ? TieBreak::kDeleteFirst : TieBreak::kAddFirst);
      for (auto line : labels.skipped) std::cerr << "line " << line << ": identical pair skipped\n";
      auto out = open_out(out_path);
      write_programs(out, labels.programs);
      const std::pair<std::string, KindCounts> row{name, labels.counts};
      std::cout << format_label_table(std::span(&row, 1));
    } else if (*stats) {
      const auto all = load_corpus_strict(corpus, parse_format(format));
      const auto pairs = non_identical(all);
      std::vector<EditProgram> programs;
      if (programs_path.empty()) {
        programs = build_labels(all).programs;
      } else {
        programs = load_programs_for(programs_path, pairs);
      }
      const auto ls = label_statistics(programs);
      const std::pair<std::string, KindCounts> row{name, ls.counts};
      std::cout << format_label_table(std::span(&row, 1));
      const auto cs = corpus_stats(pairs);
      std::cout << "pairs " << pairs.size() << " (identical skipped " << all.size() - pairs.size()
                << ")\n"
                << "vocab complex " << cs.complex_types << " simple " << cs.simple_types << '\n'
                << "mean length complex " << cs.complex_mean_length << " simple "
                << cs.simple_mean_length << '\n'
                << "weights ADD " << ls.weight(EditKind::kAdd) << " KEEP "
                << ls.weight(EditKind::kKeep) << " DEL " << ls.weight(EditKind::kDelete)
                << " STOP " << ls.weight(EditKind::kStop) << '\n';
    } else if (*train) {
      RunConfig rc;
      rc.corpus = corpus;
      rc.programs = programs_path;
      rc.vocab_size = flags.vocab_size;
      rc.dummy_pos = flags.dummy_pos;
      rc.dev_fraction = flags.dev_fraction;
      rc.ratio = WeightRatio::parse(ratio_text);
      rc.model = flags.model;
      rc.train = flags.train;
      rc.train.threads = threads_from_env();
      if (f64_check) {
        const auto pairs = non_identical(load_corpus_strict(corpus));
        run_f64_check(flags, pairs, load_programs_for(programs_path, pairs));
      }
      const auto run = train_run(rc, runs_dir, std::cerr);
      std::cout << run.dir.string() << '\n';
    } else if (*infer) {
      const auto lm = load_for_inference(checkpoint, vocab_path);
      DecodeConfig dc;
      dc.pad_on_early_stop = !no_pad;
      dc.allow_unk = allow_unk;
      dc.max_adds = max_adds;
      auto in = open_in(input);
      auto out = open_out(out_path);
      std::optional<std::ofstream> tr;
      if (!trace_path.empty()) tr = open_out(trace_path);
      infer_stream(lm.model, lm.vocab, in, out, tr ? &*tr : nullptr, dc, infer_dummy_pos);
    } else if (*eval) {
      std::vector<fs::path> ref_paths(refs.begin(), refs.end());
      const auto instances = load_eval_files(source, out_path, ref_paths);
      if (instances.empty()) throw DataError("nothing to evaluate");
      metrics::SariOptions opt;
      opt.delete_mode = delete_mode == "precision" ? metrics::DeleteMode::kPrecision
                                                   : metrics::DeleteMode::kF1;
      opt.empty = empty == "zero" ? metrics::EmptyConvention::kZero
                                  : metrics::EmptyConvention::kVacuousOne;
      opt.aggregation = aggregation == "micro" ? metrics::Aggregation::kMicro
                                               : metrics::Aggregation::kMacro;
      const auto report = metrics::evaluate(instances, opt);
      std::cout << report.summary() << '\n';
      if (!report_path.empty()) open_out(report_path) << report.key_values();
    } else if (*sweep) {
      std::vector<WeightRatio> parsed;
      for (const auto& r : ratios) parsed.push_back(WeightRatio::parse(r));
      if (parsed.size() < 2) throw std::invalid_argument("control-sweep needs at least two --ratio");
      const auto pairs = non_identical(load_corpus_strict(corpus));
      const auto programs = load_programs_for(programs_path, pairs);
      auto tc = sweep_flags.train;
      tc.threads = threads_from_env();
      const auto data = make_dataset(pairs, programs, sweep_flags.vocab_size,
                                     sweep_flags.dev_fraction, tc.seed, sweep_flags.dummy_pos);
      const auto rows = control_sweep(data, parsed, sweep_flags.model, tc, &std::cerr);
      std::cout << format_control_table(rows);
    } else if (*exec || *val) {
      const auto pairs = non_identical(load_corpus_strict(corpus));
      auto in = open_in(programs_path);
      const auto programs = read_programs(in);
      if (programs.size() != pairs.size()) {
        throw DataError(programs_path + " has " + std::to_string(programs.size()) +
                        " programs, corpus has " + std::to_string(pairs.size()) +
                        " non-identical pairs");
      }
      std::size_t bad = 0;
      for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto& src = pairs[i].complex.tokens;
        const auto diag = validate(src, programs[i]);
        if (*val) {
          if (!diag.valid()) {
            ++bad;
            std::cout << "program " << i + 1 << ": " << diag.describe() << '\n';
          } else if (execute(src, programs[i]) != pairs[i].simple.tokens) {
            ++bad;
            std::cout << "program " << i + 1 << ": output differs from the simple sentence\n";
          }
          continue;
        }
        if (!diag.valid()) {
          throw DataError("program " + std::to_string(i + 1) + ": " + diag.describe());
        }
        if (trace) {
          std::cout << "# " << join_tokens(src) << '\n';
          write_trace(std::cout, src, programs[i]);
        }
        std::cout << join_tokens(execute(src, programs[i], !no_pad)) << '\n';
      }
      if (*val) {
        std::cout << pairs.size() - bad << " of " << pairs.size() << " programs valid\n";
        if (bad) return kData;
      }
    } else if (*toy_cmd) {
      const auto pairs = make_toy_corpus(toy);
      auto out = open_out(out_path);
      save_corpus(out, pairs);
    }
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumeric;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return 0;
}
