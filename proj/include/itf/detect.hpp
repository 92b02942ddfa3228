#pragma once

#include <memory>
#include <string>
#include <vector>

#include "itf/corpus.hpp"
#include "itf/lexicon.hpp"
#include "itf/text.hpp"

namespace itf {

struct ScannedTerm {
  std::size_t sentence = 0;
  std::size_t first_token = 0;
  std::size_t last_token = 0;  // exclusive
  std::size_t begin = 0;       // code points
  std::size_t end = 0;
  TermInfo info;
  bool negated = false;
};

/// Lexicon matches over one report, with sentence-level thyroid context.
struct ScanResult {
  AnalyzedText text;
  std::vector<bool> thyroid_context;  // per sentence
  std::vector<ScannedTerm> terms;     // document order, negation cues excluded
  bool mentions_gate_term = false;    // any gate term anywhere in the report

  /// Sentence contains a non-negated nodular term.
  bool has_nodular(std::size_t sentence) const;
  bool any_context() const;
};

/// Tokenizes a report and matches the screening lexicon plus the attribute vocabulary.
///
/// A sentence is thyroid context when it contains a gate term or a standalone term
/// (goiter, thyromegaly). A negatable term is negated when a cue from
/// {no, without, absent, negative for, free of} ends at most five tokens before it in
/// the same sentence. Immutable after construction.
class ReportScanner {
 public:
  /// Throws ValidationError if the lexicon is invalid.
  explicit ReportScanner(const Lexicon& lexicon = Lexicon::defaults());

  ScanResult scan(std::string text) const;

 private:
  PhraseMatcher<TermInfo> terms_;
  PhraseMatcher<bool> gate_;
  PhraseMatcher<bool> standalone_;
};

enum class Stage1Call { NoFinding, Positive };

struct BackendDecision {
  Stage1Call call = Stage1Call::NoFinding;
  double score = 0.0;
};

/// Stage-1 classifier: does the report carry any incidental thyroid finding?
///
/// Implementations provide a score in [0,1]; the call is Positive iff score >= threshold(),
/// so label and score cannot disagree. Implementations must be stateless after construction.
class DetectorBackend {
 public:
  virtual ~DetectorBackend() = default;
  virtual std::string name() const = 0;
  virtual double score(const ReportDoc& doc) const = 0;
  virtual double threshold() const { return 0.5; }

  BackendDecision classify(const ReportDoc& doc) const {
    const double s = score(doc);
    return {s >= threshold() ? Stage1Call::Positive : Stage1Call::NoFinding, s};
  }
};

/// Deterministic baseline: score 1 iff a thyroid-context sentence holds a non-negated finding term.
std::unique_ptr<DetectorBackend> lexicon_backend(const Lexicon& lexicon = Lexicon::defaults());

struct Stage1Result {
  ReportLabel label = ReportLabel::NoFinding;
  double score = 0.0;
  std::vector<EntitySpan> evidence;
  std::vector<std::string> flags;  // "empty-text", "weak-evidence"
};

/// Screening spans (Thyroid, NormalFinding, TypeOfFinding) from thyroid-context sentences.
///
/// The first standalone term of a report that never names a gate term is tagged Thyroid;
/// later ones are findings. A calcification term next to a nodular term is left for the
/// attribute extractor.
std::vector<EntitySpan> screening_spans(const ScanResult& scan);

/// Backend call followed by the nodular/non-nodular split: a non-negated nodular term in
/// thyroid context gives ITN (nodular wins ties), otherwise a non-nodular term gives
/// NonNodular, otherwise a positive call is NonNodular flagged "weak-evidence".
Stage1Result classify_report(const ReportDoc& doc, const DetectorBackend& backend, const ReportScanner& rules);
Stage1Result classify_report(const ReportDoc& doc, const DetectorBackend& backend);

/// Shared scanner over the default lexicon.
const ReportScanner& default_scanner();

}  // namespace itf
