#include "editnts/executor.hpp"

#include <ostream>

namespace editnts {

void apply(ExecState& state, std::span<const std::string> source, const EditLabel& label) {
  if (state.halted) {
    throw HaltedError("label " + label.to_string() + " applied after STOP at step " +
                      std::to_string(state.step));
  }
  switch (label.kind()) {
    case EditKind::kKeep:
    case EditKind::kDelete:
      if (state.pointer >= source.size()) {
        throw PointerOverflow(label.to_string() + " at step " + std::to_string(state.step) +
                              " with pointer at end of source");
      }
      if (label.is(EditKind::kKeep)) state.output.push_back(source[state.pointer]);
      ++state.pointer;
      break;
    case EditKind::kAdd:
      state.output.push_back(label.word());
      break;
    case EditKind::kStop:
      state.halted = true;
      break;
  }
  ++state.step;
}

ExecState step(ExecState state, std::span<const std::string> source, const EditLabel& label) {
  apply(state, source, label);
  return state;
}

Tokens execute(std::span<const std::string> source, std::span<const EditLabel> program,
               bool pad_on_early_stop) {
  ExecState state;
  for (const auto& label : program) apply(state, source, label);
  if (pad_on_early_stop) {
    for (auto k = state.pointer; k < source.size(); ++k) state.output.push_back(source[k]);
  }
  return std::move(state.output);
}

std::string Diagnosis::describe() const {
  switch (problem) {
    case Problem::kNone:
      return padded_keeps ? "valid (" + std::to_string(padded_keeps) + " padded KEEP)" : "valid";
    case Problem::kPointerOverflow:
      return "pointer overflow at label " + std::to_string(position);
    case Problem::kMissingStop:
      return "missing STOP";
    case Problem::kNonTerminalStop:
      return "non-terminal STOP at label " + std::to_string(position);
  }
  return "?";
}

Diagnosis validate(std::span<const std::string> source, std::span<const EditLabel> program) {
  Diagnosis d;
  std::size_t k = 0;
  for (std::size_t t = 0; t < program.size(); ++t) {
    const auto kind = program[t].kind();
    if (kind == EditKind::kStop) {
      if (t + 1 != program.size()) {
        d.problem = Diagnosis::Problem::kNonTerminalStop;
        d.position = t;
        return d;
      }
    } else if (kind == EditKind::kKeep || kind == EditKind::kDelete) {
      if (k >= source.size()) {
        d.problem = Diagnosis::Problem::kPointerOverflow;
        d.position = t;
        return d;
      }
      ++k;
    }
  }
  if (program.empty() || !program.back().is(EditKind::kStop)) {
    d.problem = Diagnosis::Problem::kMissingStop;
    d.position = program.size();
    return d;
  }
  d.padded_keeps = source.size() - k;
  return d;
}

void write_trace(std::ostream& out, std::span<const std::string> source,
                 std::span<const EditLabel> program) {
  ExecState state;
  for (const auto& label : program) {
    apply(state, source, label);
    out << state.step << '\t' << label.to_string() << '\t' << state.pointer << '\t'
        << state.output.size() << '\n';
  }
}

}  // namespace editnts
