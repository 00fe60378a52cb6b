#include "editnts/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

namespace editnts::metrics {

namespace {

using Counter = std::map<std::string, double>;

Counter ngrams(const Tokens& tokens, int n) {
  Counter c;
  const auto len = static_cast<int>(tokens.size());
  for (int i = 0; i + n <= len; ++i) {
    std::string key = tokens[static_cast<std::size_t>(i)];
    for (int k = 1; k < n; ++k) {
      key += '\x1f';
      key += tokens[static_cast<std::size_t>(i + k)];
    }
    c[key] += 1.0;
  }
  return c;
}

double get(const Counter& c, const std::string& key) {
  auto it = c.find(key);
  return it == c.end() ? 0.0 : it->second;
}

// Multiset intersection and difference, keeping only positive counts.
Counter intersect(const Counter& a, const Counter& b) {
  Counter out;
  for (const auto& [k, v] : a) {
    double m = std::min(v, get(b, k));
    if (m > 0) out.emplace(k, m);
  }
  return out;
}

Counter subtract(const Counter& a, const Counter& b) {
  Counter out;
  for (const auto& [k, v] : a) {
    double d = v - get(b, k);
    if (d > 0) out.emplace(k, d);
  }
  return out;
}

Counter scaled(const Counter& a, double f) {
  Counter out = a;
  for (auto& [k, v] : out) v *= f;
  return out;
}

double ratio(double num, double den) { return den > 0 ? num / den : 0.0; }

double f1(double p, double r) { return p + r > 0 ? 2 * p * r / (p + r) : 0.0; }

double operation_score(const OperationCounts& c, bool precision_only, EmptyConvention empty) {
  const bool no_candidates = c.precision_den == 0;
  const bool no_targets = c.recall_den == 0;
  if (no_candidates && no_targets) return empty == EmptyConvention::kVacuousOne ? 1.0 : 0.0;
  const double p = ratio(c.precision_num, c.precision_den);
  if (precision_only) return p;
  return f1(p, ratio(c.recall_num, c.recall_den));
}

void check(const EvalInstance& inst) {
  if (inst.references.empty()) throw std::invalid_argument("evaluation instance has no references");
}

}  // namespace

OperationCounts& OperationCounts::operator+=(const OperationCounts& o) {
  precision_num += o.precision_num;
  precision_den += o.precision_den;
  recall_num += o.recall_num;
  recall_den += o.recall_den;
  return *this;
}

NgramCounts ngram_counts(const EvalInstance& inst, int n) {
  check(inst);
  const double num_refs = static_cast<double>(inst.references.size());
  const Counter src = ngrams(inst.source, n);
  const Counter out = ngrams(inst.output, n);
  Counter ref;
  for (const auto& r : inst.references) {
    for (const auto& [k, v] : ngrams(r, n)) ref[k] += v;
  }
  // Source and output counts are replicated once per reference so they are
  // comparable with the summed reference counts.
  const Counter src_rep = scaled(src, num_refs);
  const Counter out_rep = scaled(out, num_refs);

  NgramCounts res;

  const Counter keep = intersect(src_rep, out_rep);
  const Counter keep_good = intersect(keep, ref);
  const Counter keep_all = intersect(src_rep, ref);
  for (const auto& [k, v] : keep) {
    const double good = get(keep_good, k);
    res.keep.precision_num += good / v;
    if (good > 0) res.keep.recall_num += good / get(keep_all, k);
  }
  res.keep.precision_den = static_cast<double>(keep.size());
  res.keep.recall_den = static_cast<double>(keep_all.size());

  const Counter del = subtract(src_rep, out_rep);
  const Counter del_good = subtract(del, ref);
  const Counter del_all = subtract(src_rep, ref);
  for (const auto& [k, v] : del) {
    const double good = get(del_good, k);
    res.del.precision_num += good / v;
    if (good > 0) res.del.recall_num += good / get(del_all, k);
  }
  res.del.precision_den = static_cast<double>(del.size());
  res.del.recall_den = static_cast<double>(del_all.size());

  // Additions are scored on n-gram types, not counts.
  std::size_t add = 0, add_good = 0, add_all = 0;
  for (const auto& [k, v] : out) {
    if (src.count(k)) continue;
    ++add;
    if (ref.count(k)) ++add_good;
  }
  for (const auto& [k, v] : ref) {
    if (!src.count(k)) ++add_all;
  }
  res.add.precision_num = static_cast<double>(add_good);
  res.add.precision_den = static_cast<double>(add);
  res.add.recall_num = static_cast<double>(add_good);
  res.add.recall_den = static_cast<double>(add_all);
  return res;
}

namespace {

SariScore score_from_counts(std::span<const NgramCounts> per_order, const SariOptions& opt) {
  SariScore s;
  const bool del_precision = opt.delete_mode == DeleteMode::kPrecision;
  for (const auto& c : per_order) {
    s.add += operation_score(c.add, false, opt.empty);
    s.del += operation_score(c.del, del_precision, opt.empty);
    s.keep += operation_score(c.keep, false, opt.empty);
  }
  const double orders = static_cast<double>(per_order.size());
  s.add = 100.0 * s.add / orders;
  s.del = 100.0 * s.del / orders;
  s.keep = 100.0 * s.keep / orders;
  s.sari = (s.add + s.del + s.keep) / 3.0;
  return s;
}

std::vector<NgramCounts> all_orders(const EvalInstance& inst, int max_order) {
  std::vector<NgramCounts> v;
  for (int n = 1; n <= max_order; ++n) v.push_back(ngram_counts(inst, n));
  return v;
}

}  // namespace

SariScore sari_sentence(const EvalInstance& instance, const SariOptions& options) {
  return score_from_counts(all_orders(instance, options.max_order), options);
}

SariScore sari(std::span<const EvalInstance> instances, const SariOptions& options) {
  if (instances.empty()) throw std::invalid_argument("SARI needs at least one instance");
  if (options.max_order < 1) throw std::invalid_argument("max n-gram order must be >= 1");
  if (options.aggregation == Aggregation::kMicro) {
    std::vector<NgramCounts> pooled(static_cast<std::size_t>(options.max_order));
    for (const auto& inst : instances) {
      auto per = all_orders(inst, options.max_order);
      for (std::size_t n = 0; n < per.size(); ++n) {
        pooled[n].add += per[n].add;
        pooled[n].del += per[n].del;
        pooled[n].keep += per[n].keep;
      }
    }
    return score_from_counts(pooled, options);
  }
  SariScore total;
  for (const auto& inst : instances) {
    auto s = sari_sentence(inst, options);
    total.add += s.add;
    total.del += s.del;
    total.keep += s.keep;
  }
  const double n = static_cast<double>(instances.size());
  total.add /= n;
  total.del /= n;
  total.keep /= n;
  total.sari = (total.add + total.del + total.keep) / 3.0;
  return total;
}

// Readability

bool is_word(std::string_view token) {
  return std::any_of(token.begin(), token.end(), [](unsigned char c) { return std::isalnum(c); });
}

int count_syllables(std::string_view word) {
  auto vowel = [](char c) {
    switch (std::tolower(static_cast<unsigned char>(c))) {
      case 'a': case 'e': case 'i': case 'o': case 'u': case 'y': return true;
      default: return false;
    }
  };
  int groups = 0;
  bool in_group = false;
  for (char c : word) {
    const bool v = vowel(c);
    if (v && !in_group) ++groups;
    in_group = v;
  }
  auto lower = [](char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); };
  const auto len = word.size();
  if (len >= 1 && lower(word[len - 1]) == 'e' && !(len >= 2 && lower(word[len - 2]) == 'l')) {
    --groups;
  }
  return std::max(groups, 1);
}

double fkgl(std::span<const Tokens> sentences) {
  if (sentences.empty()) throw std::invalid_argument("FKGL needs at least one sentence");
  std::size_t words = 0, syllables = 0;
  for (const auto& s : sentences) {
    for (const auto& tok : s) {
      if (!is_word(tok)) continue;
      ++words;
      syllables += static_cast<std::size_t>(count_syllables(tok));
    }
  }
  if (words == 0) throw std::invalid_argument("FKGL needs at least one word");
  const double w = static_cast<double>(words);
  return 0.39 * (w / static_cast<double>(sentences.size())) +
         11.8 * (static_cast<double>(syllables) / w) - 15.59;
}

double pct_unchanged(std::span<const EvalInstance> instances) {
  if (instances.empty()) throw std::invalid_argument("pct_unchanged needs at least one instance");
  std::size_t same = 0;
  for (const auto& i : instances) same += i.output == i.source ? 1 : 0;
  return 100.0 * static_cast<double>(same) / static_cast<double>(instances.size());
}

LengthNovelty length_and_novelty_stats(std::span<const EvalInstance> instances) {
  if (instances.empty()) throw std::invalid_argument("length stats need at least one instance");
  LengthNovelty r;
  std::size_t nonempty = 0;
  for (const auto& inst : instances) {
    r.avg_length += static_cast<double>(inst.output.size());
    if (inst.output.empty()) continue;
    ++nonempty;
    std::unordered_set<std::string_view> src(inst.source.begin(), inst.source.end());
    std::size_t copied = 0;
    for (const auto& t : inst.output) copied += src.count(t);
    const double len = static_cast<double>(inst.output.size());
    r.pct_copied += 100.0 * static_cast<double>(copied) / len;
    r.pct_novel += 100.0 * static_cast<double>(inst.output.size() - copied) / len;
  }
  r.avg_length /= static_cast<double>(instances.size());
  if (nonempty) {
    r.pct_copied /= static_cast<double>(nonempty);
    r.pct_novel /= static_cast<double>(nonempty);
  }
  return r;
}

// Reports

namespace {
std::string fixed2(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}
}  // namespace

std::string EvalReport::summary() const {
  return "SARI " + fixed2(sari.sari) + " | add " + fixed2(sari.add) + " del " + fixed2(sari.del) +
         " keep " + fixed2(sari.keep) + " | FKGL " + fixed2(fkgl) + " | %unc " +
         fixed2(pct_unchanged);
}

std::string EvalReport::key_values() const {
  std::ostringstream os;
  os.precision(17);
  os << "sari=" << sari.sari << '\n'
     << "f_add=" << sari.add << '\n'
     << "f_del=" << sari.del << '\n'
     << "f_keep=" << sari.keep << '\n'
     << "fkgl=" << fkgl << '\n'
     << "pct_unchanged=" << pct_unchanged << '\n'
     << "instances=" << num_instances << '\n'
     << "delete_mode=" << (options.delete_mode == DeleteMode::kF1 ? "f1" : "precision") << '\n'
     << "empty_convention="
     << (options.empty == EmptyConvention::kVacuousOne ? "vacuous-one" : "zero") << '\n'
     << "aggregation=" << (options.aggregation == Aggregation::kMacro ? "macro" : "micro")
     << '\n';
  return os.str();
}

EvalReport evaluate(std::span<const EvalInstance> instances, const SariOptions& options) {
  EvalReport r;
  r.options = options;
  r.num_instances = instances.size();
  r.sari = sari(instances, options);
  std::vector<Tokens> outputs;
  outputs.reserve(instances.size());
  for (const auto& i : instances) outputs.push_back(i.output);
  bool any_word = false;
  for (const auto& o : outputs) {
    any_word = any_word || std::any_of(o.begin(), o.end(), [](const auto& t) { return is_word(t); });
  }
  r.fkgl = any_word ? fkgl(outputs) : 0.0;
  r.pct_unchanged = pct_unchanged(instances);
  return r;
}

}  // namespace editnts::metrics
