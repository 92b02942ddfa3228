#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itf/corpus.hpp"
#include "itf/extract.hpp"

namespace itf {

/// Precision, recall and F1 from pooled counts; each ratio is 0 when its denominator is 0.
struct Prf {
  std::int64_t tp = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static Prf from_counts(std::int64_t tp, std::int64_t fp, std::int64_t fn);
};

inline constexpr std::size_t kLabelCount = 3;

struct ClassificationScore {
  std::size_t n = 0;
  /// confusion[gold][pred], indexed by ReportLabel.
  std::array<std::array<std::int64_t, kLabelCount>, kLabelCount> confusion{};
  std::array<Prf, kLabelCount> per_label{};
  Prf macro;  // unweighted mean of per-label P, R, F1
  double accuracy = 0.0;
  Prf binary;  // NonNodular and ITN collapsed into "ITF"
  double binary_accuracy = 0.0;
};

struct LabeledReport {
  std::string report_id;
  ReportLabel label = ReportLabel::NoFinding;
};

/// Aligns by report_id. Throws ValidationError when the id sets differ or repeat.
ClassificationScore score_classification(std::span<const LabeledReport> gold, std::span<const LabeledReport> pred);

enum class MatchMode { Exact, Overlap };

template <>
struct EnumNames<MatchMode> {
  static constexpr std::array<std::string_view, 2> names{"exact", "overlap"};
};

using SpansByReport = std::map<std::string, std::vector<EntitySpan>>;

struct SpanScore {
  MatchMode mode = MatchMode::Exact;
  std::map<EntityCategory, Prf> per_category;  // categories present in gold or pred
  Prf micro;
  Prf macro;  // unweighted over categories present in gold
};

/// Exact: one-to-one on identical (start, end, category). Overlap: same-category pairs with
/// positive overlap matched one-to-one, longest overlap first (ties by gold then pred order).
/// Reports present on one side only contribute all their spans as FN or FP.
SpanScore score_spans(const SpansByReport& gold, const SpansByReport& pred, MatchMode mode);

/// Whitespace-token accuracy where each token takes the category of the first span covering
/// any of its code points (or none). An approximation of a per-report accuracy.
struct TokenAccuracy {
  std::int64_t tokens = 0;
  std::int64_t correct = 0;
  double accuracy = 0.0;
};
TokenAccuracy token_accuracy(std::span<const ReportDoc> docs, const SpansByReport& gold, const SpansByReport& pred);

struct EvalReport {
  ClassificationScore classification;
  SpanScore exact;
  SpanScore overlap;
  MatchMode primary = MatchMode::Overlap;
  std::optional<TokenAccuracy> tokens;
};

EvalReport evaluate(std::span<const AnnotatedReport> gold, std::span<const FindingResult> pred, MatchMode primary,
                    std::span<const ReportDoc> docs = {});

std::string eval_json(const EvalReport& report);

}  // namespace itf
