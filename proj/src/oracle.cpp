#include "editnts/oracle.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace editnts {

EditProgram construct_program(std::span<const std::string> source,
                              std::span<const std::string> target, TieBreak tie_break) {
  const std::size_t n = source.size();
  const std::size_t m = target.size();
  const std::size_t width = m + 1;

  // dist[i * width + j] = insert/delete distance between source[i:] and target[j:].
  std::vector<std::size_t> dist((n + 1) * width);
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return dist[i * width + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, m) = n - i;
  for (std::size_t j = 0; j <= m; ++j) at(n, j) = m - j;
  for (std::size_t i = n; i-- > 0;) {
    for (std::size_t j = m; j-- > 0;) {
      at(i, j) = source[i] == target[j] ? at(i + 1, j + 1)
                                        : std::min(at(i + 1, j), at(i, j + 1)) + 1;
    }
  }

  EditProgram program;
  program.reserve(n + m + 1);
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && source[i] == target[j]) {
      program.push_back(EditLabel::keep());
      ++i, ++j;
      continue;
    }
    const bool add_ok = j < m && at(i, j) == at(i, j + 1) + 1;
    const bool del_ok = i < n && at(i, j) == at(i + 1, j) + 1;
    const bool take_add = tie_break == TieBreak::kAddFirst ? add_ok : add_ok && !del_ok;
    if (take_add) {
      program.push_back(EditLabel::add(target[j]));
      ++j;
    } else {
      program.push_back(EditLabel::del());
      ++i;
    }
  }
  program.push_back(EditLabel::stop());
  return program;
}

LabelStats LabelStats::scaled(double add, double keep, double del) const {
  if (add <= 0 || keep <= 0 || del <= 0) throw std::invalid_argument("weight factors must be positive");
  LabelStats out = *this;
  out.weights[static_cast<std::size_t>(EditKind::kAdd)] *= add;
  out.weights[static_cast<std::size_t>(EditKind::kKeep)] *= keep;
  out.weights[static_cast<std::size_t>(EditKind::kDelete)] *= del;
  return out;
}

LabelStats label_statistics(std::span<const EditProgram> programs) {
  if (programs.empty()) throw std::invalid_argument("label_statistics needs at least one program");
  LabelStats stats;
  for (const auto& p : programs) {
    auto c = count_kinds(p);
    for (auto k : kAllEditKinds) stats.counts[k] += c[k];
  }
  const double total = static_cast<double>(stats.counts.total());
  double max_inv = 0.0;
  std::array<double, kNumEditKinds> inv{};
  for (std::size_t k = 0; k < kNumEditKinds; ++k) {
    if (stats.counts.n[k] > 0) {
      inv[k] = total / static_cast<double>(stats.counts.n[k]);
      max_inv = std::max(max_inv, inv[k]);
    }
  }
  if (max_inv == 0.0) return uniform_weights(stats.counts);
  for (auto& w : inv) {
    if (w == 0.0) w = max_inv;
  }
  const double mean = std::accumulate(inv.begin(), inv.end(), 0.0) / kNumEditKinds;
  for (std::size_t k = 0; k < kNumEditKinds; ++k) stats.weights[k] = inv[k] / mean;
  return stats;
}

LabelStats uniform_weights(const KindCounts& counts) {
  LabelStats s;
  s.counts = counts;
  return s;
}

}  // namespace editnts
