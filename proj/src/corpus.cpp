#include "editnts/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "editnts/errors.hpp"

namespace editnts {

namespace {

constexpr std::array<std::string_view, PosTagSet::kNumTags> kTags = {
    "CC",  "CD",  "DT",   "EX",  "FW",  "IN",   "JJ",  "JJR", "JJS",  "LS", "MD", "NN",
    "NNS", "NNP", "NNPS", "PDT", "POS", "PRP",  "PRP$", "RB", "RBR",  "RBS", "RP", "SYM",
    "TO",  "UH",  "VB",   "VBD", "VBG", "VBN",  "VBP", "VBZ", "WDT",  "WP", "WP$", "WRB",
    "$",   "#",   "``",   "''",  "(",   ")",    ",",   ".",   ":"};

constexpr std::array<std::string_view, Vocabulary::kNumReserved> kReserved = {
    "<pad>", "<unk>", "<keep>", "<del>", "<stop>"};

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::string_view> split_tabs(std::string_view row) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto tab = row.find('\t', start);
    out.push_back(row.substr(start, tab == std::string_view::npos ? tab : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

}  // namespace

const std::array<std::string_view, PosTagSet::kNumTags>& PosTagSet::tags() { return kTags; }

std::optional<TokenId> PosTagSet::find(std::string_view tag) {
  if (tag == "-LRB-") tag = "(";
  if (tag == "-RRB-") tag = ")";
  auto it = std::find(kTags.begin(), kTags.end(), tag);
  if (it == kTags.end()) return std::nullopt;
  return static_cast<TokenId>(it - kTags.begin());
}

TokenId PosTagSet::id(std::string_view tag) { return find(tag).value_or(kUnknown); }

void check_sentence(const Sentence& s, std::size_t line) {
  if (s.tokens.empty()) throw DataError("empty sentence", line);
  for (const auto& t : s.tokens) {
    if (t.empty() || has_space(t)) throw DataError("token is empty or contains whitespace", line);
  }
  if (s.pos) {
    if (s.pos->size() != s.tokens.size()) {
      throw DataError("POS length " + std::to_string(s.pos->size()) + " != token length " +
                          std::to_string(s.tokens.size()),
                      line);
    }
    for (const auto& tag : *s.pos) {
      if (!PosTagSet::contains(tag)) throw DataError("unknown POS tag '" + tag + "'", line);
    }
  }
}

// Vocabulary

const std::array<std::string_view, Vocabulary::kNumReserved>& Vocabulary::reserved_names() {
  return kReserved;
}

Vocabulary::Vocabulary() {
  for (auto name : kReserved) {
    token_to_id_.emplace(std::string(name), static_cast<TokenId>(id_to_token_.size()));
    id_to_token_.emplace_back(name);
  }
}

TokenId Vocabulary::add(const std::string& token) {
  auto [it, inserted] = token_to_id_.emplace(token, static_cast<TokenId>(id_to_token_.size()));
  if (inserted) id_to_token_.push_back(token);
  return it->second;
}

TokenId Vocabulary::id(std::string_view token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
  return token_to_id_.find(token) != token_to_id_.end();
}

const std::string& Vocabulary::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw std::out_of_range("token id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

void Vocabulary::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write vocabulary " + path.string());
  for (std::size_t i = kNumReserved; i < id_to_token_.size(); ++i) out << id_to_token_[i] << '\n';
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read vocabulary " + path.string());
  Vocabulary v;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    auto tok = strip_cr(line);
    if (tok.empty() || has_space(tok)) throw DataError("bad vocabulary entry", n);
    if (v.contains(tok)) throw DataError("duplicate vocabulary entry '" + std::string(tok) + "'", n);
    v.add(std::string(tok));
  }
  return v;
}

// Loading

Tokens split_tokens(std::string_view text) {
  Tokens out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    if (i == text.size()) break;
    auto j = text.find(' ', i);
    if (j == std::string_view::npos) j = text.size();
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(std::span<const std::string> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

SentencePair parse_tsv_row(std::string_view row, std::size_t line) {
  auto cols = split_tabs(strip_cr(row));
  if (cols.size() != 2 && cols.size() != 4) {
    throw DataError("expected 2 or 4 tab-separated columns, got " + std::to_string(cols.size()),
                    line);
  }
  SentencePair pair;
  pair.line = line;
  pair.complex.tokens = split_tokens(cols[0]);
  pair.simple.tokens = split_tokens(cols[1]);
  if (cols.size() == 4) {
    pair.complex.pos = split_tokens(cols[2]);
    pair.simple.pos = split_tokens(cols[3]);
  }
  check_sentence(pair.complex, line);
  check_sentence(pair.simple, line);
  return pair;
}

std::size_t LoadResult::num_identical() const {
  return static_cast<std::size_t>(
      std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.identical(); }));
}

LoadResult load_corpus(std::istream& in) {
  LoadResult result;
  std::string row;
  std::size_t line = 0;
  while (std::getline(in, row)) {
    ++line;
    if (strip_cr(row).empty()) {
      result.errors.push_back({line, "empty row"});
      continue;
    }
    try {
      result.pairs.push_back(parse_tsv_row(row, line));
    } catch (const DataError& e) {
      result.errors.push_back({line, e.what()});
    }
  }
  return result;
}

LoadResult load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  if (format == CorpusFormat::kParallelFiles) {
    // `path` is a prefix: <path>.complex and <path>.simple, plus optional .pos files.
    auto with = [&](const char* ext) {
      auto p = path;
      p += ext;
      return p;
    };
    auto cpos = with(".complex.pos");
    auto spos = with(".simple.pos");
    bool tagged = std::filesystem::exists(cpos) && std::filesystem::exists(spos);
    return load_parallel_files(with(".complex"), with(".simple"), tagged ? cpos : "",
                               tagged ? spos : "");
  }
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus " + path.string());
  return load_corpus(in);
}

LoadResult load_parallel_files(const std::filesystem::path& complex_path,
                               const std::filesystem::path& simple_path,
                               const std::filesystem::path& complex_pos_path,
                               const std::filesystem::path& simple_pos_path) {
  auto read_lines = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw DataError("cannot open " + p.string());
    std::vector<std::string> lines;
    std::string l;
    while (std::getline(in, l)) lines.emplace_back(strip_cr(l));
    return lines;
  };
  auto complex = read_lines(complex_path);
  auto simple = read_lines(simple_path);
  const bool tagged = !complex_pos_path.empty();
  std::vector<std::string> complex_pos, simple_pos;
  if (tagged) {
    complex_pos = read_lines(complex_pos_path);
    simple_pos = read_lines(simple_pos_path);
  }
  if (simple.size() != complex.size() ||
      (tagged && (complex_pos.size() != complex.size() || simple_pos.size() != complex.size()))) {
    throw DataError("parallel files have different line counts");
  }
  LoadResult result;
  for (std::size_t i = 0; i < complex.size(); ++i) {
    std::string row = complex[i] + '\t' + simple[i];
    if (tagged) row += '\t' + complex_pos[i] + '\t' + simple_pos[i];
    try {
      result.pairs.push_back(parse_tsv_row(row, i + 1));
    } catch (const DataError& e) {
      result.errors.push_back({i + 1, e.what()});
    }
  }
  return result;
}

std::string format_tsv_row(const SentencePair& pair) {
  std::string row = join_tokens(pair.complex.tokens) + '\t' + join_tokens(pair.simple.tokens);
  if (pair.complex.pos && pair.simple.pos) {
    row += '\t' + join_tokens(*pair.complex.pos) + '\t' + join_tokens(*pair.simple.pos);
  }
  return row;
}

void save_corpus(std::ostream& out, std::span<const SentencePair> pairs) {
  for (const auto& p : pairs) out << format_tsv_row(p) << '\n';
}

// Vocabulary construction

Vocabulary build_vocab(std::span<const SentencePair> pairs, std::size_t limit) {
  if (pairs.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  if (limit == 0) throw std::invalid_argument("vocabulary limit must be positive");

  struct Entry {
    std::size_t count = 0;
    std::size_t first_seen = 0;
  };
  std::unordered_map<std::string, Entry> counts;
  std::vector<std::string> order;
  auto bump = [&](const std::string& tok) {
    auto [it, inserted] = counts.try_emplace(tok);
    if (inserted) {
      it->second.first_seen = order.size();
      order.push_back(tok);
    }
    ++it->second.count;
  };
  for (const auto& p : pairs) {
    for (const auto& t : p.complex.tokens) bump(t);
    for (const auto& t : p.simple.tokens) bump(t);
  }

  const auto& reserved = Vocabulary::reserved_names();
  std::erase_if(order, [&](const std::string& t) {
    return std::find(reserved.begin(), reserved.end(), t) != reserved.end();
  });
  std::stable_sort(order.begin(), order.end(), [&](const std::string& a, const std::string& b) {
    return counts[a].count > counts[b].count;
  });

  Vocabulary vocab;
  for (std::size_t i = 0; i < order.size() && i < limit; ++i) vocab.add(order[i]);
  return vocab;
}

std::vector<TokenId> encode(std::span<const std::string> tokens, const Vocabulary& vocab) {
  std::vector<TokenId> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(vocab.id(t));
  return ids;
}

std::vector<TokenId> encode(const Sentence& sentence, const Vocabulary& vocab) {
  if (sentence.tokens.empty()) throw std::invalid_argument("cannot encode an empty sentence");
  return encode(std::span<const std::string>(sentence.tokens), vocab);
}

std::vector<TokenId> encode_pos(const Sentence& sentence) {
  std::vector<TokenId> ids(sentence.size(), PosTagSet::kUnknown);
  if (sentence.pos) {
    for (std::size_t i = 0; i < ids.size() && i < sentence.pos->size(); ++i) {
      ids[i] = PosTagSet::id((*sentence.pos)[i]);
    }
  }
  return ids;
}

CorpusStats corpus_stats(std::span<const SentencePair> pairs) {
  CorpusStats s;
  if (pairs.empty()) return s;
  std::unordered_map<std::string_view, char> complex, simple;
  std::size_t clen = 0, slen = 0;
  for (const auto& p : pairs) {
    for (const auto& t : p.complex.tokens) complex.emplace(t, 0);
    for (const auto& t : p.simple.tokens) simple.emplace(t, 0);
    clen += p.complex.size();
    slen += p.simple.size();
  }
  s.complex_types = complex.size();
  s.simple_types = simple.size();
  s.complex_mean_length = static_cast<double>(clen) / static_cast<double>(pairs.size());
  s.simple_mean_length = static_cast<double>(slen) / static_cast<double>(pairs.size());
  return s;
}

}  // namespace editnts
