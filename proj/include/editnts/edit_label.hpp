#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace editnts {

enum class EditKind : unsigned char { kAdd = 0, kKeep = 1, kDelete = 2, kStop = 3 };

inline constexpr std::size_t kNumEditKinds = 4;
inline constexpr std::array<EditKind, kNumEditKinds> kAllEditKinds = {
    EditKind::kAdd, EditKind::kKeep, EditKind::kDelete, EditKind::kStop};

std::string_view kind_name(EditKind kind);

/// One edit operation. `word` is non-empty exactly when kind == kAdd.
class EditLabel {
 public:
  static EditLabel keep() { return EditLabel(EditKind::kKeep, {}); }
  static EditLabel del() { return EditLabel(EditKind::kDelete, {}); }
  static EditLabel stop() { return EditLabel(EditKind::kStop, {}); }
  static EditLabel add(std::string word);

  EditKind kind() const noexcept { return kind_; }
  const std::string& word() const noexcept { return word_; }
  bool is(EditKind k) const noexcept { return kind_ == k; }

  /// `KEEP`, `DEL`, `STOP` or `ADD|word`.
  std::string to_string() const;
  static EditLabel parse(std::string_view text);

  bool operator==(const EditLabel&) const = default;
  // Orders KEEP < ADD < DELETE < STOP, ignoring the word.
  static int rank(EditKind k);

 private:
  EditLabel(EditKind kind, std::string word) : kind_(kind), word_(std::move(word)) {}
  EditKind kind_;
  std::string word_;
};

using EditProgram = std::vector<EditLabel>;

struct KindCounts {
  std::array<std::size_t, kNumEditKinds> n{};

  std::size_t& operator[](EditKind k) { return n[static_cast<std::size_t>(k)]; }
  std::size_t operator[](EditKind k) const { return n[static_cast<std::size_t>(k)]; }
  std::size_t total() const { return n[0] + n[1] + n[2] + n[3]; }
};

KindCounts count_kinds(std::span<const EditLabel> program);

/// Space-separated labels on one line.
std::string format_program(std::span<const EditLabel> program);
EditProgram parse_program(std::string_view line);

/// One program per line. Throws DataError with the offending line number.
std::vector<EditProgram> read_programs(std::istream& in);
void write_programs(std::ostream& out, std::span<const EditProgram> programs);

}  // namespace editnts
