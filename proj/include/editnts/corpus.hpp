#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace editnts {

using Tokens = std::vector<std::string>;
using TokenId = std::int32_t;

/// A tokenized sentence with an optional parallel POS-tag sequence.
struct Sentence {
  Tokens tokens;
  std::optional<Tokens> pos;

  Sentence() = default;
  explicit Sentence(Tokens t, std::optional<Tokens> p = std::nullopt)
      : tokens(std::move(t)), pos(std::move(p)) {}

  std::size_t size() const noexcept { return tokens.size(); }
  bool operator==(const Sentence&) const = default;
};

/// Throws DataError unless the sentence is non-empty, whitespace-free and its
/// tags (if any) are aligned and drawn from the tag set.
void check_sentence(const Sentence& s, std::size_t line = 0);

struct SentencePair {
  Sentence complex;
  Sentence simple;
  std::size_t line = 0;  // 1-based source line, 0 when built in memory

  bool identical() const { return complex.tokens == simple.tokens; }
};

/// The 45 Penn Treebank tags produced by the usual English taggers, plus one
/// reserved slot for unknown or missing tags.
class PosTagSet {
 public:
  static constexpr std::size_t kNumTags = 45;
  static constexpr TokenId kUnknown = static_cast<TokenId>(kNumTags);
  static constexpr std::size_t kTableSize = kNumTags + 1;

  static const std::array<std::string_view, kNumTags>& tags();
  static std::optional<TokenId> find(std::string_view tag);
  static bool contains(std::string_view tag) { return find(tag).has_value(); }
  /// Unknown tags map to kUnknown.
  static TokenId id(std::string_view tag);
};

/// Token <-> id map. Ids 0..4 are reserved: PAD, UNK, KEEP, DELETE, STOP.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kKeep = 2;
  static constexpr TokenId kDelete = 3;
  static constexpr TokenId kStop = 4;
  static constexpr TokenId kNumReserved = 5;
  static const std::array<std::string_view, kNumReserved>& reserved_names();

  /// Reserved symbols only.
  Vocabulary();

  /// Appends a regular token; returns the existing id if already present.
  TokenId add(const std::string& token);

  TokenId id(std::string_view token) const;  // UNK when absent
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  std::size_t size() const noexcept { return id_to_token_.size(); }

  /// Writes one regular token per line; reserved ids are implied.
  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  bool operator==(const Vocabulary& o) const { return id_to_token_ == o.id_to_token_; }

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
  };
  std::unordered_map<std::string, TokenId, Hash, std::equal_to<>> token_to_id_;
  std::vector<std::string> id_to_token_;
};

enum class CorpusFormat { kTsv, kParallelFiles };

struct RowError {
  std::size_t line;
  std::string message;
};

struct LoadResult {
  std::vector<SentencePair> pairs;
  std::vector<RowError> errors;

  std::size_t num_identical() const;
};

/// Parses one TSV row: complex<TAB>simple[<TAB>complex_pos<TAB>simple_pos].
/// Throws DataError carrying `line`.
SentencePair parse_tsv_row(std::string_view row, std::size_t line);

/// Reads a TSV corpus. Bad rows are reported in `errors`, good rows are kept.
LoadResult load_corpus(std::istream& in);
LoadResult load_corpus(const std::filesystem::path& path,
                       CorpusFormat format = CorpusFormat::kTsv);

/// Line-aligned complex/simple files, optionally with line-aligned tag files.
LoadResult load_parallel_files(const std::filesystem::path& complex_path,
                               const std::filesystem::path& simple_path,
                               const std::filesystem::path& complex_pos_path = {},
                               const std::filesystem::path& simple_pos_path = {});

/// Inverse of parse_tsv_row.
std::string format_tsv_row(const SentencePair& pair);
void save_corpus(std::ostream& out, std::span<const SentencePair> pairs);

Tokens split_tokens(std::string_view text);
std::string join_tokens(std::span<const std::string> tokens);

/// Keeps the `limit` most frequent tokens over both sides of the corpus.
/// Frequency ties go to the token seen first. Throws DataError on an empty
/// corpus.
Vocabulary build_vocab(std::span<const SentencePair> pairs, std::size_t limit = 30000);

std::vector<TokenId> encode(const Sentence& sentence, const Vocabulary& vocab);
std::vector<TokenId> encode(std::span<const std::string> tokens, const Vocabulary& vocab);

/// Tag ids for the sentence; every token gets PosTagSet::kUnknown when the
/// sentence carries no tags.
std::vector<TokenId> encode_pos(const Sentence& sentence);

/// Number of distinct tokens on each side, before any truncation.
struct CorpusStats {
  std::size_t complex_types = 0;
  std::size_t simple_types = 0;
  double complex_mean_length = 0.0;
  double simple_mean_length = 0.0;
};
CorpusStats corpus_stats(std::span<const SentencePair> pairs);

}  // namespace editnts
