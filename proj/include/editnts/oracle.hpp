#pragma once

#include <array>
#include <span>
#include <string>

#include "editnts/edit_label.hpp"

namespace editnts {

/// Which move wins when insertion and deletion are both on a shortest path.
/// Only kAddFirst is a supported training path; kDeleteFirst exists for ablations.
enum class TieBreak { kAddFirst, kDeleteFirst };

/// Expert program turning `source` into `target` by a shortest insert/delete
/// path (no substitution). Walks the path left to right, taking KEEP whenever
/// the current tokens match, then ADD, then DELETE. Always ends in STOP.
EditProgram construct_program(std::span<const std::string> source,
                              std::span<const std::string> target,
                              TieBreak tie_break = TieBreak::kAddFirst);

/// Per-kind label counts and loss weights.
struct LabelStats {
  KindCounts counts;
  std::array<double, kNumEditKinds> weights{1.0, 1.0, 1.0, 1.0};

  double weight(EditKind k) const { return weights[static_cast<std::size_t>(k)]; }

  /// Multiplies the ADD, KEEP and DELETE weights by the given factors.
  LabelStats scaled(double add, double keep, double del) const;
};

/// Counts every label and sets weights to inverse frequencies normalized to
/// mean 1. Kinds that never occur get the largest observed inverse frequency.
LabelStats label_statistics(std::span<const EditProgram> programs);

/// Uniform weights of 1 with the given counts.
LabelStats uniform_weights(const KindCounts& counts = {});

}  // namespace editnts
