#include "editnts/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numeric>
#include <sstream>

#include "editnts/checkpoint.hpp"
#include "editnts/errors.hpp"
#include "editnts/executor.hpp"
#include "editnts/random.hpp"

namespace editnts {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
}

std::string epoch_stem(std::size_t epoch) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "epoch-%04zu", epoch);
  return buf;
}

json train_to_json(const TrainConfig& t) {
  return {{"learning_rate", t.learning_rate}, {"weight_decay", t.weight_decay},
          {"clip_norm", t.clip_norm},         {"batch_size", t.batch_size},
          {"epochs", t.epochs},               {"seed", t.seed},
          {"beta1", t.beta1},                 {"beta2", t.beta2},
          {"epsilon", t.epsilon}};
}

TrainConfig train_from_json(const json& j) {
  TrainConfig t;
  t.learning_rate = j.at("learning_rate").get<double>();
  t.weight_decay = j.at("weight_decay").get<double>();
  t.clip_norm = j.at("clip_norm").get<double>();
  t.batch_size = j.at("batch_size").get<std::size_t>();
  t.epochs = j.at("epochs").get<std::size_t>();
  t.seed = j.at("seed").get<std::uint64_t>();
  t.beta1 = j.at("beta1").get<double>();
  t.beta2 = j.at("beta2").get<double>();
  t.epsilon = j.at("epsilon").get<double>();
  return t;
}

// Optimizer moments go in their own checkpoint as m/<name> and v/<name>.
template <typename Real>
void save_optimizer(const fs::path& path, AdamW<Real>& opt, const ad::ParameterSet<Real>& params) {
  ad::ParameterSet<Real> state;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params.at(i);
    state[state.add("m/" + p.name, p.value.rows(), p.value.cols())].value = opt.first_moment().at(i);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& p = params.at(i);
    state[state.add("v/" + p.name, p.value.rows(), p.value.cols())].value = opt.second_moment().at(i);
  }
  save_tensors(path, state, json{{"steps", opt.steps()}}.dump());
}

template <typename Real>
void load_optimizer(const fs::path& path, AdamW<Real>& opt, const ad::ParameterSet<Real>& params) {
  ad::ParameterSet<Real> state;
  for (const char* prefix : {"m/", "v/"}) {
    for (const auto& p : params) state.add(prefix + p.name, p.value.rows(), p.value.cols());
  }
  const auto meta = json::parse(load_tensors(path, state));
  const std::size_t n = params.size();
  for (std::size_t i = 0; i < n; ++i) {
    opt.first_moment().at(i) = state.at(i).value;
    opt.second_moment().at(i) = state.at(n + i).value;
  }
  opt.set_steps(meta.at("steps").template get<std::size_t>());
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream ss;
  ss << std::setprecision(6) << v;
  return ss.str();
}

}  // namespace

// Label construction

LabelBuild build_labels(std::span<const SentencePair> pairs, TieBreak tie_break) {
  LabelBuild out;
  for (const auto& pair : pairs) {
    if (pair.identical()) {
      out.skipped.push_back(pair.line);
      continue;
    }
    auto program = construct_program(pair.complex.tokens, pair.simple.tokens, tie_break);
    const auto c = count_kinds(program);
    for (auto k : kAllEditKinds) out.counts[k] += c[k];
    out.pairs.push_back(pair);
    out.programs.push_back(std::move(program));
  }
  return out;
}

std::string format_label_table(std::span<const std::pair<std::string, KindCounts>> rows) {
  std::size_t name_width = 7;
  for (const auto& [name, counts] : rows) name_width = std::max(name_width, name.size());
  std::ostringstream ss;
  ss << std::left << std::setw(static_cast<int>(name_width)) << "" << std::right;
  for (const char* h : {"KEEP", "DELETE", "ADD", "STOP"}) ss << std::setw(12) << h;
  ss << '\n';
  for (const auto& [name, c] : rows) {
    ss << std::left << std::setw(static_cast<int>(name_width)) << name << std::right;
    for (auto k : {EditKind::kKeep, EditKind::kDelete, EditKind::kAdd, EditKind::kStop}) {
      ss << std::setw(12) << c[k];
    }
    ss << '\n';
  }
  return ss.str();
}

std::vector<SentencePair> non_identical(std::span<const SentencePair> pairs) {
  std::vector<SentencePair> out;
  for (const auto& p : pairs) {
    if (!p.identical()) out.push_back(p);
  }
  return out;
}

std::vector<SentencePair> load_corpus_strict(const fs::path& path, CorpusFormat format) {
  auto result = load_corpus(path, format);
  if (!result.errors.empty()) {
    const auto& e = result.errors.front();
    throw DataError(path.string() + ": " + e.message, e.line);
  }
  if (result.pairs.empty()) throw DataError(path.string() + ": corpus is empty");
  return std::move(result.pairs);
}

std::vector<EditProgram> load_programs_for(const fs::path& path,
                                           std::span<const SentencePair> pairs) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  auto programs = read_programs(in);
  if (programs.size() != pairs.size()) {
    throw DataError(path.string() + " has " + std::to_string(programs.size()) +
                    " programs but the corpus has " + std::to_string(pairs.size()) +
                    " non-identical pairs");
  }
  for (std::size_t i = 0; i < programs.size(); ++i) {
    const auto& src = pairs[i].complex.tokens;
    const auto diag = validate(src, programs[i]);
    if (!diag.valid()) {
      throw DataError(path.string() + ": " + diag.describe(), i + 1);
    }
    if (diag.padded_keeps != 0 || execute(src, programs[i]) != pairs[i].simple.tokens) {
      throw DataError(path.string() + ": program does not produce the simple sentence of corpus line " +
                          std::to_string(pairs[i].line),
                      i + 1);
    }
  }
  return programs;
}

// Loss weights

WeightRatio WeightRatio::parse(std::string_view text) {
  double v[3];
  std::size_t at = 0;
  for (int i = 0; i < 3; ++i) {
    const auto colon = text.find(':', at);
    if ((i < 2) != (colon != std::string_view::npos)) {
      throw std::invalid_argument("ratio must look like A:K:D, got '" + std::string(text) + "'");
    }
    const auto part = text.substr(at, i < 2 ? colon - at : std::string_view::npos);
    const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v[i]);
    if (ec != std::errc() || ptr != part.data() + part.size() || !(v[i] > 0) || !std::isfinite(v[i])) {
      throw std::invalid_argument("bad ratio component '" + std::string(part) + "'");
    }
    at = colon + 1;
  }
  return {v[0], v[1], v[2]};
}

std::string WeightRatio::to_string() const {
  return format_double(add) + ":" + format_double(keep) + ":" + format_double(del);
}

// Run config

std::string RunConfig::to_json() const {
  json j = {
      {"corpus", corpus},
      {"programs", programs},
      {"corpus_digest", corpus_digest},
      {"vocab_size", vocab_size},
      {"dummy_pos", dummy_pos},
      {"dev_fraction", dev_fraction},
      {"ratio", ratio.to_string()},
      {"model", json::parse(model_config_to_json(model))},
      {"train", train_to_json(train)},
  };
  return j.dump(2);
}

RunConfig RunConfig::from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    RunConfig c;
    c.corpus = j.at("corpus").get<std::string>();
    c.programs = j.at("programs").get<std::string>();
    c.corpus_digest = j.at("corpus_digest").get<std::string>();
    c.vocab_size = j.at("vocab_size").get<std::size_t>();
    c.dummy_pos = j.at("dummy_pos").get<bool>();
    c.dev_fraction = j.at("dev_fraction").get<double>();
    c.ratio = WeightRatio::parse(j.at("ratio").get<std::string>());
    c.model = model_config_from_json(j.at("model").dump());
    c.train = train_from_json(j.at("train"));
    return c;
  } catch (const json::exception& e) {
    throw DataError(std::string("bad run config: ") + e.what());
  }
}

std::string RunConfig::hash() const {
  auto j = json::parse(to_json());
  j["train"].erase("epochs");
  // Paths are only labels; the digest pins the data itself.
  j.erase("corpus");
  j.erase("programs");
  return hex64(fnv1a(j.dump())).substr(0, 12);
}

// Datasets

Dataset make_dataset(std::span<const SentencePair> pairs, std::span<const EditProgram> programs,
                     std::size_t vocab_size, double dev_fraction, std::uint64_t seed,
                     bool dummy_pos) {
  if (pairs.size() != programs.size()) throw std::invalid_argument("pairs and programs differ in length");
  if (pairs.empty()) throw DataError("no training pairs");
  if (!(dev_fraction >= 0 && dev_fraction < 1)) throw std::invalid_argument("dev fraction must be in [0, 1)");

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(derive_seed(seed, 0xd5));
  shuffle(order.begin(), order.end(), rng);
  auto n_dev = static_cast<std::size_t>(std::lround(dev_fraction * static_cast<double>(pairs.size())));
  n_dev = std::min(n_dev, pairs.size() - 1);
  // Keep corpus order inside each split.
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_dev));
  std::sort(order.begin() + static_cast<std::ptrdiff_t>(n_dev), order.end());

  Dataset d;
  std::vector<EditProgram> dev_programs;
  for (std::size_t i = 0; i < order.size(); ++i) {
    SentencePair p = pairs[order[i]];
    if (dummy_pos) {
      p.complex.pos.reset();
      p.simple.pos.reset();
    } else if (!p.complex.pos) {
      throw DataError("pair has no POS tags (use --dummy-pos for untagged corpora)", p.line);
    }
    if (i < n_dev) {
      d.dev_pairs.push_back(std::move(p));
      dev_programs.push_back(programs[order[i]]);
    } else {
      d.train_pairs.push_back(std::move(p));
      d.train_programs.push_back(programs[order[i]]);
    }
  }
  d.vocab = build_vocab(d.train_pairs, vocab_size);
  for (std::size_t i = 0; i < d.train_pairs.size(); ++i) {
    d.train.push_back(make_example(d.train_pairs[i], d.train_programs[i], d.vocab));
  }
  for (std::size_t i = 0; i < d.dev_pairs.size(); ++i) {
    d.dev.push_back(make_example(d.dev_pairs[i], dev_programs[i], d.vocab));
  }
  return d;
}

LabelStats loss_weights(std::span<const EditProgram> programs, const WeightRatio& ratio) {
  return label_statistics(programs).scaled(ratio.add, ratio.keep, ratio.del);
}

// Training runs

std::optional<fs::path> latest_checkpoint(const fs::path& run_dir) {
  std::optional<fs::path> best;
  if (!fs::is_directory(run_dir)) return best;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const auto name = entry.path().filename().string();
    if (name.starts_with("epoch-") && entry.path().extension() == ".ckpt") {
      if (!best || name > best->filename().string()) best = entry.path();
    }
  }
  return best;
}

TrainRun train_run(const RunConfig& input, const fs::path& root, std::ostream& log) {
  RunConfig config = input;
  config.train.check();
  const auto pairs = non_identical(load_corpus_strict(config.corpus));
  const auto programs = load_programs_for(config.programs, pairs);
  config.corpus_digest =
      hex64(fnv1a(read_file(config.programs), fnv1a(read_file(config.corpus))));

  Dataset data = make_dataset(pairs, programs, config.vocab_size, config.dev_fraction,
                              config.train.seed, config.dummy_pos);
  config.model.vocab_size = data.vocab.size();
  config.model.check();

  TrainRun run;
  run.dir = root / config.run_name();
  fs::create_directories(run.dir);
  write_file(run.dir / "config.json", config.to_json() + "\n");
  data.vocab.save(run.dir / "vocab.txt");

  Model<float> model(config.model, derive_seed(config.train.seed, 0x1a17));
  Trainer<float> trainer(model, config.train, loss_weights(data.train_programs, config.ratio));
  if (auto last = latest_checkpoint(run.dir)) {
    load_params(*last, model);
    auto opt_path = *last;
    opt_path.replace_extension(".adam");
    load_optimizer(opt_path, trainer.optimizer(), model.params());
    run.resumed_from = json::parse(read_checkpoint_meta(*last)).at("epoch").get<std::size_t>();
    trainer.set_epoch(run.resumed_from);
    log << "resuming " << run.dir.string() << " after epoch " << run.resumed_from << '\n';
  } else {
    write_file(run.dir / "train_log.tsv", "epoch\tloss\ttrain_acc\tdev_acc\ttimestamp\n");
  }
  log << "train " << data.train.size() << " dev " << data.dev.size() << " vocab "
      << data.vocab.size() << " params " << model.params().num_scalars() << '\n';

  while (trainer.epoch() < config.train.epochs) {
    auto entry = trainer.run_epoch(data.train, data.dev);
    const auto stem = epoch_stem(entry.epoch);
    save_params(run.dir / (stem + ".ckpt"), model, json{{"epoch", entry.epoch}}.dump());
    save_optimizer(run.dir / (stem + ".adam"), trainer.optimizer(), model.params());
    std::ofstream tsv(run.dir / "train_log.tsv", std::ios::app);
    tsv << entry.epoch << '\t' << format_double(entry.loss) << '\t'
        << format_double(entry.train_accuracy) << '\t' << format_double(entry.dev_accuracy) << '\t'
        << entry.timestamp << '\n';
    log << "epoch " << entry.epoch << " loss " << format_double(entry.loss) << " train_acc "
        << format_double(entry.train_accuracy) << " dev_acc " << format_double(entry.dev_accuracy)
        << '\n';
    run.logs.push_back(std::move(entry));
  }
  return run;
}

// Inference

ReplayProgrammer::ReplayProgrammer(EditProgram program, const Vocabulary& vocab)
    : program_(std::move(program)), vocab_(vocab) {}

Eigen::VectorXd ReplayProgrammer::next_scores(std::size_t) {
  const LabelSpace space{vocab_.size()};
  Eigen::VectorXd scores = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  if (t_ >= program_.size()) {
    scores(static_cast<Eigen::Index>(space.stop())) = 1.0;
    return scores;
  }
  const auto& label = program_[t_];
  std::size_t index = space.stop();
  switch (label.kind()) {
    case EditKind::kAdd: index = static_cast<std::size_t>(vocab_.id(label.word())); break;
    case EditKind::kKeep: index = space.keep(); break;
    case EditKind::kDelete: index = space.del(); break;
    case EditKind::kStop: break;
  }
  scores(static_cast<Eigen::Index>(index)) = 1.0;
  return scores;
}

void ReplayProgrammer::advance(std::size_t, std::optional<TokenId>) { ++t_; }

LoadedModel load_for_inference(const fs::path& checkpoint, const fs::path& vocab_path) {
  fs::path ckpt = checkpoint;
  if (fs::is_directory(ckpt)) {
    auto last = latest_checkpoint(ckpt);
    if (!last) throw CheckpointError("no checkpoint in " + ckpt.string());
    ckpt = *last;
  }
  const fs::path vp = vocab_path.empty() ? ckpt.parent_path() / "vocab.txt" : vocab_path;
  LoadedModel lm{load_model<float>(ckpt), Vocabulary::load(vp)};
  if (lm.vocab.size() != lm.model.config().vocab_size) {
    throw CheckpointError("vocabulary " + vp.string() + " has " + std::to_string(lm.vocab.size()) +
                          " entries, checkpoint expects " +
                          std::to_string(lm.model.config().vocab_size));
  }
  return lm;
}

std::size_t infer_stream(const Model<float>& model, const Vocabulary& vocab, std::istream& in,
                         std::ostream& out, std::ostream* trace, const DecodeConfig& decode,
                         bool dummy_pos) {
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tab = line.find('\t');
    Sentence s(split_tokens(std::string_view(line).substr(0, tab)));
    if (tab != std::string::npos && !dummy_pos) s.pos = split_tokens(std::string_view(line).substr(tab + 1));
    if (s.tokens.empty()) {
      out << '\n';
      if (trace) *trace << "STOP\n";
      continue;
    }
    check_sentence(s, line_no);
    const auto result = model.infer(s, vocab, decode);
    out << join_tokens(result.output) << '\n';
    if (trace) *trace << format_program(result.program) << '\n';
  }
  return line_no;
}

// Evaluation

std::vector<metrics::EvalInstance> load_eval_files(const fs::path& source, const fs::path& output,
                                                   std::span<const fs::path> refs) {
  if (refs.empty()) throw DataError("at least one reference file is needed");
  const auto src = read_lines(source);
  const auto hyp = read_lines(output);
  std::vector<std::vector<std::string>> ref_lines;
  for (const auto& r : refs) ref_lines.push_back(read_lines(r));
  auto check = [&](const fs::path& p, std::size_t n) {
    if (n != src.size()) {
      throw DataError(p.string() + " has " + std::to_string(n) + " lines, " + source.string() +
                      " has " + std::to_string(src.size()));
    }
  };
  check(output, hyp.size());
  for (std::size_t i = 0; i < refs.size(); ++i) check(refs[i], ref_lines[i].size());

  std::vector<metrics::EvalInstance> out;
  for (std::size_t i = 0; i < src.size(); ++i) {
    metrics::EvalInstance inst{split_tokens(src[i]), split_tokens(hyp[i]), {}};
    for (const auto& r : ref_lines) inst.references.push_back(split_tokens(r[i]));
    out.push_back(std::move(inst));
  }
  return out;
}

// Controllability sweep

std::vector<ControlRow> control_sweep(const Dataset& data, std::span<const WeightRatio> ratios,
                                      const ModelConfig& model_config, const TrainConfig& train,
                                      std::ostream* log) {
  if (ratios.size() < 2) throw std::invalid_argument("a control sweep needs at least two ratios");
  const auto& eval_pairs = data.dev_pairs.empty() ? data.train_pairs : data.dev_pairs;
  ModelConfig mc = model_config;
  mc.vocab_size = data.vocab.size();

  std::vector<ControlRow> rows;
  for (const auto& ratio : ratios) {
    Model<float> model(mc, derive_seed(train.seed, 0x1a17));
    Trainer<float> trainer(model, train, loss_weights(data.train_programs, ratio));
    EpochLog last;
    while (trainer.epoch() < train.epochs) last = trainer.run_epoch(data.train, data.dev);

    std::vector<metrics::EvalInstance> outputs;
    for (const auto& p : eval_pairs) {
      outputs.push_back({p.complex.tokens, model.infer(p.complex, data.vocab).output,
                         {p.simple.tokens}});
    }
    ControlRow row{ratio, metrics::length_and_novelty_stats(outputs),
                   data.dev.empty() ? last.train_accuracy : last.dev_accuracy};
    if (log) {
      *log << "ratio " << ratio.to_string() << " loss " << format_double(last.loss) << " avg_len "
           << format_double(row.stats.avg_length) << '\n';
    }
    rows.push_back(row);
  }
  return rows;
}

std::string format_control_table(std::span<const ControlRow> rows) {
  std::ostringstream ss;
  ss << std::left << std::setw(14) << "ratio(A:K:D)" << std::right << std::setw(10) << "avg len"
     << std::setw(11) << "% copied" << std::setw(10) << "% novel" << '\n';
  ss << std::fixed << std::setprecision(2);
  for (const auto& r : rows) {
    ss << std::left << std::setw(14) << r.ratio.to_string() << std::right << std::setw(10)
       << r.stats.avg_length << std::setw(11) << r.stats.pct_copied << std::setw(10)
       << r.stats.pct_novel << '\n';
  }
  return ss.str();
}

}  // namespace editnts
