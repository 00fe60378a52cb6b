#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "editnts/corpus.hpp"
#include "editnts/edit_label.hpp"
#include "editnts/errors.hpp"

namespace editnts {

/// KEEP or DELETE issued with the edit pointer already past the last token.
class PointerOverflow : public Error {
 public:
  using Error::Error;
};

/// A label was applied after STOP.
class HaltedError : public Error {
 public:
  using Error::Error;
};

/// Interpreter state. `pointer` counts KEEP+DELETE so far, output.size()
/// counts KEEP+ADD so far.
struct ExecState {
  std::size_t pointer = 0;
  Tokens output;
  std::size_t step = 0;
  bool halted = false;

  bool operator==(const ExecState&) const = default;
};

/// Applies one label. Throws PointerOverflow or HaltedError.
ExecState step(ExecState state, std::span<const std::string> source, const EditLabel& label);

/// In-place variant of step().
void apply(ExecState& state, std::span<const std::string> source, const EditLabel& label);

/// Runs the program. When it stops (or runs out of labels) before consuming
/// the whole source and `pad_on_early_stop` is set, the untouched suffix is
/// copied to the output as if KEEP had been issued for it.
Tokens execute(std::span<const std::string> source, std::span<const EditLabel> program,
               bool pad_on_early_stop = true);

struct Diagnosis {
  enum class Problem { kNone, kPointerOverflow, kMissingStop, kNonTerminalStop };

  Problem problem = Problem::kNone;
  std::size_t position = 0;       // label index of the problem
  std::size_t padded_keeps = 0;   // synthetic KEEPs implied by early STOP

  bool valid() const { return problem == Problem::kNone; }
  std::string describe() const;
};

/// Checks a program against its source without executing it.
Diagnosis validate(std::span<const std::string> source, std::span<const EditLabel> program);

/// One row per executed label: `t label k |output|`, where k and |output| are
/// the values after the step.
void write_trace(std::ostream& out, std::span<const std::string> source,
                 std::span<const EditLabel> program);

}  // namespace editnts
