#pragma once

// Independent, deliberately naive implementations used as test oracles.

#include <algorithm>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "editnts/corpus.hpp"
#include "editnts/edit_label.hpp"

namespace reference {

using editnts::EditKind;
using editnts::EditLabel;
using editnts::EditProgram;
using editnts::Tokens;

/// Textbook O(nm) longest common subsequence length, prefix formulation.
inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

/// Straight-line interpreter: no padding, no error types, nullopt on any
/// invalid step or on a missing/early STOP.
inline std::optional<Tokens> interpret(const Tokens& x, const EditProgram& z) {
  Tokens out;
  std::size_t k = 0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    switch (z[t].kind()) {
      case EditKind::kAdd: out.push_back(z[t].word()); break;
      case EditKind::kKeep:
        if (k >= x.size()) return std::nullopt;
        out.push_back(x[k++]);
        break;
      case EditKind::kDelete:
        if (k >= x.size()) return std::nullopt;
        ++k;
        break;
      case EditKind::kStop:
        if (t + 1 != z.size() || k != x.size()) return std::nullopt;
        return out;
    }
  }
  return std::nullopt;
}

/// Every insert/delete script of minimal length (KEEP only on equal tokens),
/// each ending in STOP.
inline std::vector<EditProgram> all_minimal_scripts(const Tokens& x, const Tokens& y) {
  const std::size_t best = x.size() + y.size() - 2 * lcs_length(x, y);
  std::vector<EditProgram> out;
  EditProgram cur;
  auto rec = [&](auto&& self, std::size_t i, std::size_t j, std::size_t cost) -> void {
    if (cost > best) return;
    if (i == x.size() && j == y.size()) {
      if (cost == best) {
        out.push_back(cur);
        out.back().push_back(EditLabel::stop());
      }
      return;
    }
    if (i < x.size() && j < y.size() && x[i] == y[j]) {
      cur.push_back(EditLabel::keep());
      self(self, i + 1, j + 1, cost);
      cur.pop_back();
    }
    if (j < y.size()) {
      cur.push_back(EditLabel::add(y[j]));
      self(self, i, j + 1, cost + 1);
      cur.pop_back();
    }
    if (i < x.size()) {
      cur.push_back(EditLabel::del());
      self(self, i + 1, j, cost + 1);
      cur.pop_back();
    }
  };
  rec(rec, 0, 0, 0);
  return out;
}

/// Within every maximal run of non-KEEP labels, all ADDs precede all DELETEs.
inline bool adds_before_deletes(const EditProgram& z) {
  bool seen_delete = false;
  for (const auto& l : z) {
    if (l.is(EditKind::kKeep)) seen_delete = false;
    if (l.is(EditKind::kDelete)) seen_delete = true;
    if (l.is(EditKind::kAdd) && seen_delete) return false;
  }
  return true;
}

/// Lexicographic order on label kinds with KEEP < ADD < DELETE < STOP.
inline bool kind_less(const EditProgram& a, const EditProgram& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      [](const EditLabel& l, const EditLabel& r) {
                                        return EditLabel::rank(l.kind()) < EditLabel::rank(r.kind());
                                      });
}

/// The canonical script by brute force: among minimal scripts with ADDs
/// before DELETEs in every run, the lexicographically smallest one.
inline std::optional<EditProgram> brute_force_canonical(const Tokens& x, const Tokens& y) {
  std::optional<EditProgram> best;
  for (auto& z : all_minimal_scripts(x, y)) {
    if (!adds_before_deletes(z)) continue;
    if (!best || kind_less(z, *best)) best = std::move(z);
  }
  return best;
}

/// Random sequence over an alphabet of `alphabet` single-letter-ish tokens.
inline Tokens random_tokens(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                            std::size_t alphabet) {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len), sym(0, alphabet - 1);
  Tokens t(len(rng));
  for (auto& s : t) s = "w" + std::to_string(sym(rng));
  return t;
}

/// Every sequence over `alphabet` with length in [lo, hi].
inline std::vector<Tokens> all_sequences(std::size_t lo, std::size_t hi,
                                         const std::vector<std::string>& alphabet) {
  std::vector<Tokens> out;
  std::vector<Tokens> layer{{}};
  for (std::size_t len = 0; len <= hi; ++len) {
    if (len >= lo) out.insert(out.end(), layer.begin(), layer.end());
    std::vector<Tokens> next;
    for (const auto& s : layer) {
      for (const auto& a : alphabet) {
        next.push_back(s);
        next.back().push_back(a);
      }
    }
    layer = std::move(next);
  }
  return out;
}

}  // namespace reference
