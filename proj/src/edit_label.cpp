#include "editnts/edit_label.hpp"

#include <istream>
#include <ostream>
#include <stdexcept>

#include "editnts/corpus.hpp"
#include "editnts/errors.hpp"

namespace editnts {

std::string_view kind_name(EditKind kind) {
  switch (kind) {
    case EditKind::kAdd: return "ADD";
    case EditKind::kKeep: return "KEEP";
    case EditKind::kDelete: return "DEL";
    case EditKind::kStop: return "STOP";
  }
  return "?";
}

EditLabel EditLabel::add(std::string word) {
  if (word.empty()) throw std::invalid_argument("ADD label needs a word");
  return EditLabel(EditKind::kAdd, std::move(word));
}

int EditLabel::rank(EditKind k) {
  switch (k) {
    case EditKind::kKeep: return 0;
    case EditKind::kAdd: return 1;
    case EditKind::kDelete: return 2;
    case EditKind::kStop: return 3;
  }
  return 4;
}

std::string EditLabel::to_string() const {
  if (kind_ == EditKind::kAdd) return "ADD|" + word_;
  return std::string(kind_name(kind_));
}

EditLabel EditLabel::parse(std::string_view text) {
  if (text == "KEEP") return keep();
  if (text == "DEL") return del();
  if (text == "STOP") return stop();
  if (text.starts_with("ADD|") && text.size() > 4) return add(std::string(text.substr(4)));
  throw DataError("unknown edit label '" + std::string(text) + "'");
}

KindCounts count_kinds(std::span<const EditLabel> program) {
  KindCounts c;
  for (const auto& l : program) ++c[l.kind()];
  return c;
}

std::string format_program(std::span<const EditLabel> program) {
  std::string out;
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (i) out += ' ';
    out += program[i].to_string();
  }
  return out;
}

EditProgram parse_program(std::string_view line) {
  EditProgram program;
  for (const auto& tok : split_tokens(line)) program.push_back(EditLabel::parse(tok));
  return program;
}

std::vector<EditProgram> read_programs(std::istream& in) {
  std::vector<EditProgram> programs;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    try {
      programs.push_back(parse_program(line));
    } catch (const DataError& e) {
      throw DataError(e.what(), n);
    }
  }
  return programs;
}

void write_programs(std::ostream& out, std::span<const EditProgram> programs) {
  for (const auto& p : programs) out << format_program(p) << '\n';
}

}  // namespace editnts
