#include "itf/eval.hpp"

#include <algorithm>
#include <set>
#include <tuple>

#include "itf/errors.hpp"
#include "itf/utf8.hpp"
#include "json.hpp"

namespace itf {

Prf Prf::from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn) {
  Prf p;
  p.tp = tp;
  p.fp = fp;
  p.fn = fn;
  p.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  p.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  p.f1 = p.precision + p.recall > 0.0 ? 2.0 * p.precision * p.recall / (p.precision + p.recall) : 0.0;
  return p;
}

namespace {

std::map<std::string, ReportLabel> index_labels(std::span<const LabeledReport> v, const char* side) {
  std::map<std::string, ReportLabel> out;
  for (const auto& r : v) {
    if (!out.emplace(r.report_id, r.label).second) {
      throw ValidationError(std::string("duplicate report_id in ") + side + ": " + r.report_id);
    }
  }
  return out;
}

Prf mean_prf(const std::vector<Prf>& parts) {
  Prf m;
  if (parts.empty()) return m;
  for (const auto& p : parts) {
    m.tp += p.tp;
    m.fp += p.fp;
    m.fn += p.fn;
    m.precision += p.precision;
    m.recall += p.recall;
    m.f1 += p.f1;
  }
  const auto k = static_cast<double>(parts.size());
  m.precision /= k;
  m.recall /= k;
  m.f1 /= k;
  return m;
}

struct Counts {
  std::int64_t tp = 0, fp = 0, fn = 0;
};

std::int64_t overlap_len(const EntitySpan& a, const EntitySpan& b) {
  const auto lo = std::max(a.start, b.start);
  const auto hi = std::min(a.end, b.end);
  return hi > lo ? static_cast<std::int64_t>(hi - lo) : 0;
}

// Matches within one report and one category.
std::int64_t match_count(const std::vector<const EntitySpan*>& gold, const std::vector<const EntitySpan*>& pred,
                         MatchMode mode) {
  if (mode == MatchMode::Exact) {
    std::multiset<std::pair<std::size_t, std::size_t>> g;
    for (const auto* s : gold) g.emplace(s->start, s->end);
    std::int64_t tp = 0;
    for (const auto* s : pred) {
      auto it = g.find({s->start, s->end});
      if (it != g.end()) {
        g.erase(it);
        ++tp;
      }
    }
    return tp;
  }
  std::vector<std::tuple<std::int64_t, std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t j = 0; j < pred.size(); ++j) {
      if (const auto len = overlap_len(*gold[i], *pred[j]); len > 0) pairs.emplace_back(-len, i, j);
    }
  }
  std::sort(pairs.begin(), pairs.end());
  std::vector<bool> gold_used(gold.size()), pred_used(pred.size());
  std::int64_t tp = 0;
  for (const auto& [neg_len, i, j] : pairs) {
    if (gold_used[i] || pred_used[j]) continue;
    gold_used[i] = pred_used[j] = true;
    ++tp;
  }
  return tp;
}

SpansByReport spans_of(std::span<const AnnotatedReport> v) {
  SpansByReport out;
  for (const auto& a : v) out[a.report_id] = a.spans;
  return out;
}

}  // namespace

ClassificationScore score_classification(std::span<const LabeledReport> gold, std::span<const LabeledReport> pred) {
  const auto g = index_labels(gold, "gold");
  const auto p = index_labels(pred, "pred");
  if (g.size() != p.size()) throw ValidationError("gold and pred cover different report sets");
  ClassificationScore s;
  std::int64_t correct = 0, binary_correct = 0;
  std::int64_t btp = 0, bfp = 0, bfn = 0;
  for (auto gi = g.begin(), pi = p.begin(); gi != g.end(); ++gi, ++pi) {
    if (gi->first != pi->first) throw ValidationError("report '" + gi->first + "' has no prediction");
    const auto gl = static_cast<std::size_t>(gi->second);
    const auto pl = static_cast<std::size_t>(pi->second);
    ++s.confusion[gl][pl];
    if (gl == pl) ++correct;
    const bool gb = gi->second != ReportLabel::NoFinding;
    const bool pb = pi->second != ReportLabel::NoFinding;
    if (gb == pb) ++binary_correct;
    if (gb && pb) ++btp;
    if (!gb && pb) ++bfp;
    if (gb && !pb) ++bfn;
  }
  s.n = g.size();
  std::vector<Prf> parts;
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    std::int64_t fp = 0, fn = 0;
    for (std::size_t o = 0; o < kLabelCount; ++o) {
      if (o == k) continue;
      fp += s.confusion[o][k];
      fn += s.confusion[k][o];
    }
    s.per_label[k] = Prf::from_counts(s.confusion[k][k], fp, fn);
    parts.push_back(s.per_label[k]);
  }
  s.macro = mean_prf(parts);
  const double n = static_cast<double>(s.n);
  s.accuracy = s.n ? static_cast<double>(correct) / n : 0.0;
  s.binary = Prf::from_counts(btp, bfp, bfn);
  s.binary_accuracy = s.n ? static_cast<double>(binary_correct) / n : 0.0;
  return s;
}

SpanScore score_spans(const SpansByReport& gold, const SpansByReport& pred, MatchMode mode) {
  std::map<EntityCategory, Counts> counts;
  std::set<EntityCategory> in_gold;
  std::set<std::string> ids;
  for (const auto& [id, v] : gold) ids.insert(id);
  for (const auto& [id, v] : pred) ids.insert(id);
  static const std::vector<EntitySpan> kNone;
  for (const auto& id : ids) {
    const auto gi = gold.find(id);
    const auto pi = pred.find(id);
    const auto& gs = gi == gold.end() ? kNone : gi->second;
    const auto& ps = pi == pred.end() ? kNone : pi->second;
    std::map<EntityCategory, std::pair<std::vector<const EntitySpan*>, std::vector<const EntitySpan*>>> by_cat;
    for (const auto& s : gs) {
      by_cat[s.category].first.push_back(&s);
      in_gold.insert(s.category);
    }
    for (const auto& s : ps) by_cat[s.category].second.push_back(&s);
    for (const auto& [cat, sides] : by_cat) {
      const auto tp = match_count(sides.first, sides.second, mode);
      auto& c = counts[cat];
      c.tp += tp;
      c.fp += static_cast<std::int64_t>(sides.second.size()) - tp;
      c.fn += static_cast<std::int64_t>(sides.first.size()) - tp;
    }
  }
  SpanScore out;
  out.mode = mode;
  Counts pooled;
  std::vector<Prf> macro_parts;
  for (const auto& [cat, c] : counts) {
    out.per_category[cat] = Prf::from_counts(c.tp, c.fp, c.fn);
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    if (in_gold.count(cat)) macro_parts.push_back(out.per_category[cat]);
  }
  out.micro = Prf::from_counts(pooled.tp, pooled.fp, pooled.fn);
  out.macro = mean_prf(macro_parts);
  return out;
}

TokenAccuracy token_accuracy(std::span<const ReportDoc> docs, const SpansByReport& gold, const SpansByReport& pred) {
  TokenAccuracy acc;
  static const std::vector<EntitySpan> kNone;
  auto label_of = [](const std::vector<EntitySpan>& spans, std::size_t b, std::size_t e) -> int {
    for (const auto& s : spans) {
      if (s.start < e && b < s.end) return static_cast<int>(s.category);
    }
    return -1;
  };
  for (const auto& doc : docs) {
    const auto gi = gold.find(doc.report_id);
    const auto pi = pred.find(doc.report_id);
    const auto& gs = gi == gold.end() ? kNone : gi->second;
    const auto& ps = pi == pred.end() ? kNone : pi->second;
    const Utf8Text text(doc.text);
    std::size_t i = 0;
    while (i < text.size()) {
      auto space = [&](std::size_t k) {
        const char32_t c = text.at(k);
        return c == U' ' || c == U'\n' || c == U'\t' || c == U'\r';
      };
      if (space(i)) {
        ++i;
        continue;
      }
      std::size_t j = i;
      while (j < text.size() && !space(j)) ++j;
      ++acc.tokens;
      if (label_of(gs, i, j) == label_of(ps, i, j)) ++acc.correct;
      i = j;
    }
  }
  acc.accuracy = acc.tokens ? static_cast<double>(acc.correct) / static_cast<double>(acc.tokens) : 0.0;
  return acc;
}

EvalReport evaluate(std::span<const AnnotatedReport> gold, std::span<const FindingResult> pred, MatchMode primary,
                    std::span<const ReportDoc> docs) {
  std::vector<LabeledReport> gl, pl;
  for (const auto& a : gold) gl.push_back({a.report_id, a.report_label});
  SpansByReport ps;
  for (const auto& f : pred) {
    pl.push_back({f.report_id, f.label});
    ps[f.report_id] = f.spans;
  }
  const auto gs = spans_of(gold);
  EvalReport r;
  r.classification = score_classification(gl, pl);
  r.exact = score_spans(gs, ps, MatchMode::Exact);
  r.overlap = score_spans(gs, ps, MatchMode::Overlap);
  r.primary = primary;
  if (!docs.empty()) r.tokens = token_accuracy(docs, gs, ps);
  return r;
}

namespace {

nlohmann::ordered_json prf_json(const Prf& p) {
  nlohmann::ordered_json j;
  j["precision"] = p.precision;
  j["recall"] = p.recall;
  j["f1"] = p.f1;
  j["tp"] = p.tp;
  j["fp"] = p.fp;
  j["fn"] = p.fn;
  return j;
}

nlohmann::ordered_json span_json(const SpanScore& s) {
  nlohmann::ordered_json j;
  j["mode"] = std::string(to_string(s.mode));
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (const auto& [cat, p] : s.per_category) cats[std::string(to_string(cat))] = prf_json(p);
  j["per_category"] = cats;
  j["micro"] = prf_json(s.micro);
  nlohmann::ordered_json macro;
  macro["precision"] = s.macro.precision;
  macro["recall"] = s.macro.recall;
  macro["f1"] = s.macro.f1;
  j["macro"] = macro;
  return j;
}

}  // namespace

std::string eval_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  const auto& c = r.classification;
  nlohmann::ordered_json cls;
  cls["n"] = c.n;
  cls["accuracy"] = c.accuracy;
  nlohmann::ordered_json labels = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < kLabelCount; ++k) {
    labels[std::string(to_string(static_cast<ReportLabel>(k)))] = prf_json(c.per_label[k]);
  }
  cls["per_label"] = labels;
  nlohmann::ordered_json macro;
  macro["precision"] = c.macro.precision;
  macro["recall"] = c.macro.recall;
  macro["f1"] = c.macro.f1;
  cls["macro"] = macro;
  nlohmann::ordered_json conf = nlohmann::ordered_json::object();
  for (std::size_t g = 0; g < kLabelCount; ++g) {
    nlohmann::ordered_json row = nlohmann::ordered_json::object();
    for (std::size_t p = 0; p < kLabelCount; ++p) row[std::string(to_string(static_cast<ReportLabel>(p)))] = c.confusion[g][p];
    conf[std::string(to_string(static_cast<ReportLabel>(g)))] = row;
  }
  cls["confusion"] = conf;
  nlohmann::ordered_json bin = prf_json(c.binary);
  bin["accuracy"] = c.binary_accuracy;
  cls["binary_itf"] = bin;
  j["classification"] = cls;
  nlohmann::ordered_json spans;
  spans["primary_mode"] = std::string(to_string(r.primary));
  spans["exact"] = span_json(r.exact);
  spans["overlap"] = span_json(r.overlap);
  j["spans"] = spans;
  if (r.tokens) {
    nlohmann::ordered_json t;
    t["tokens"] = r.tokens->tokens;
    t["correct"] = r.tokens->correct;
    t["accuracy"] = r.tokens->accuracy;
    t["approximation"] = true;
    j["token_accuracy"] = t;
  }
  return j.dump(2) + "\n";
}

}  // namespace itf
