#include "itf/detect.hpp"

#include <algorithm>

#include "itf/errors.hpp"

namespace itf {
namespace {

constexpr std::size_t kNegationWindow = 5;

bool is_calcification(std::string_view phrase) {
  const auto norm = phrase_tokens(phrase);
  for (auto t : calcification_terms()) {
    if (phrase_tokens(t) == norm) return true;
  }
  return false;
}

class LexiconBackend final : public DetectorBackend {
 public:
  explicit LexiconBackend(const Lexicon& lexicon) : scanner_(lexicon) {}

  std::string name() const override { return "lexicon"; }

  double score(const ReportDoc& doc) const override {
    const auto scan = scanner_.scan(doc.text);
    for (const auto& t : scan.terms) {
      if (is_finding(t.info.kind) && !t.negated && scan.thyroid_context[t.sentence]) return 1.0;
    }
    return 0.0;
  }

 private:
  ReportScanner scanner_;
};

}  // namespace

bool ScanResult::has_nodular(std::size_t sentence) const {
  return std::any_of(terms.begin(), terms.end(), [&](const ScannedTerm& t) {
    return t.sentence == sentence && t.info.kind == TermKind::Nodular && !t.negated;
  });
}

bool ScanResult::any_context() const {
  return std::find(thyroid_context.begin(), thyroid_context.end(), true) != thyroid_context.end();
}

ReportScanner::ReportScanner(const Lexicon& lexicon) {
  if (auto problems = lexicon.validate(); !problems.empty()) throw ValidationError("lexicon: " + problems.front());
  // Insertion order decides collisions: earlier entries win.
  for (const auto& t : lexicon.standalone_nonnodular) {
    terms_.add(t, {TermKind::Standalone, std::string(kNonNodularSubtype)});
    standalone_.add(t, true);
  }
  for (const auto& t : lexicon.nodular_terms) terms_.add(t, {TermKind::Nodular, std::string(kNodularSubtype)});
  for (const auto& t : lexicon.nonnodular_terms) {
    const auto kind = is_calcification(t) ? TermKind::Calcification : TermKind::NonNodular;
    terms_.add(t, {kind, std::string(kNonNodularSubtype)});
  }
  for (const auto& a : attribute_terms()) terms_.add(a.phrase, {a.kind, std::string(a.subtype)});
  for (auto c : negation_cues()) terms_.add(c, {TermKind::NegationCue, {}});
  for (const auto& t : lexicon.normal_terms) terms_.add(t, {TermKind::Normal, {}});
  for (const auto& t : lexicon.gate_terms) {
    terms_.add(t, {TermKind::Gate, {}});
    gate_.add(t, true);
  }
}

ScanResult ReportScanner::scan(std::string text) const {
  ScanResult out{AnalyzedText(std::move(text)), {}, {}, false};
  const auto& tokens = out.text.tokens();
  const auto& sentences = out.text.sentences();
  out.thyroid_context.assign(sentences.size(), false);

  for (std::size_t si = 0; si < sentences.size(); ++si) {
    const auto& s = sentences[si];
    const bool gate = !gate_.match(tokens, s.first_token, s.last_token).empty();
    const bool standalone = !standalone_.match(tokens, s.first_token, s.last_token).empty();
    out.mentions_gate_term = out.mentions_gate_term || gate;
    out.thyroid_context[si] = gate || standalone;

    std::vector<std::size_t> cue_last;  // index of each cue's final token
    for (const auto& m : terms_.match(tokens, s.first_token, s.last_token)) {
      if (m.payload->kind == TermKind::NegationCue) {
        cue_last.push_back(m.last_token - 1);
        continue;
      }
      ScannedTerm t;
      t.sentence = si;
      t.first_token = m.first_token;
      t.last_token = m.last_token;
      t.begin = tokens[m.first_token].begin;
      t.end = tokens[m.last_token - 1].end;
      t.info = *m.payload;
      if (is_negatable(t.info.kind)) {
        t.negated = std::any_of(cue_last.begin(), cue_last.end(), [&](std::size_t c) {
          return c < t.first_token && t.first_token - c <= kNegationWindow;
        });
      }
      out.terms.push_back(std::move(t));
    }
  }
  return out;
}

std::vector<EntitySpan> screening_spans(const ScanResult& scan) {
  std::vector<EntitySpan> out;
  bool standalone_seen = false;
  auto push = [&](const ScannedTerm& t, EntityCategory cat, std::optional<std::string> subtype) {
    out.push_back({t.begin, t.end, cat, std::move(subtype), scan.text.text().slice(t.begin, t.end)});
  };
  for (const auto& t : scan.terms) {
    if (!scan.thyroid_context[t.sentence]) continue;
    switch (t.info.kind) {
      case TermKind::Gate:
        push(t, EntityCategory::Thyroid, std::nullopt);
        break;
      case TermKind::Normal:
        push(t, EntityCategory::NormalFinding, std::nullopt);
        break;
      case TermKind::Standalone:
        if (!scan.mentions_gate_term && !standalone_seen) {
          push(t, EntityCategory::Thyroid, std::nullopt);
        } else if (!t.negated) {
          push(t, EntityCategory::TypeOfFinding, std::string(kNonNodularSubtype));
        }
        standalone_seen = true;
        break;
      case TermKind::Nodular:
        if (!t.negated) push(t, EntityCategory::TypeOfFinding, std::string(kNodularSubtype));
        break;
      case TermKind::NonNodular:
        if (!t.negated) push(t, EntityCategory::TypeOfFinding, std::string(kNonNodularSubtype));
        break;
      case TermKind::Calcification:
        if (!t.negated && !scan.has_nodular(t.sentence)) {
          push(t, EntityCategory::TypeOfFinding, std::string(kNonNodularSubtype));
        }
        break;
      default:
        break;
    }
  }
  return out;
}

Stage1Result classify_report(const ReportDoc& doc, const DetectorBackend& backend, const ReportScanner& rules) {
  Stage1Result out;
  if (doc.text.empty()) {
    out.flags.push_back("empty-text");
    return out;
  }
  const auto decision = backend.classify(doc);
  out.score = decision.score;
  const auto scan = rules.scan(doc.text);
  out.evidence = screening_spans(scan);
  if (decision.call == Stage1Call::NoFinding) return out;

  bool nodular = false;
  bool nonnodular = false;
  for (const auto& t : scan.terms) {
    if (!scan.thyroid_context[t.sentence] || t.negated || !is_finding(t.info.kind)) continue;
    if (t.info.kind == TermKind::Nodular) {
      nodular = true;
    } else {
      nonnodular = true;
    }
  }
  if (nodular) {
    out.label = ReportLabel::ITN;
  } else {
    out.label = ReportLabel::NonNodular;
    if (!nonnodular) out.flags.push_back("weak-evidence");
  }
  return out;
}

const ReportScanner& default_scanner() {
  static const ReportScanner scanner;
  return scanner;
}

Stage1Result classify_report(const ReportDoc& doc, const DetectorBackend& backend) {
  return classify_report(doc, backend, default_scanner());
}

std::unique_ptr<DetectorBackend> lexicon_backend(const Lexicon& lexicon) {
  return std::make_unique<LexiconBackend>(lexicon);
}

}  // namespace itf
