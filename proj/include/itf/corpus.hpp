#pragma once

#include <algorithm>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "itf/date.hpp"
#include "itf/enum_names.hpp"

namespace itf {

enum class Modality { CT, MRI, NuclearMedicine, PET, Ultrasound };
enum class BodyGroup { Head, Neck, Chest, Mixed };
enum class ReportLabel { NoFinding, NonNodular, ITN };

/// The ten annotation categories of the annotation dictionary.
enum class EntityCategory {
  Thyroid,
  NormalFinding,
  TypeOfFinding,
  NumberOfFindings,
  Size,
  Location,
  RadiologicalCharacteristic,
  AssociatedFinding,
  RadiologyClassification,
  Recommendation,
};

template <>
struct EnumNames<Modality> {
  static constexpr std::array<std::string_view, 5> names{"CT", "MRI", "NuclearMedicine", "PET", "Ultrasound"};
};
template <>
struct EnumNames<BodyGroup> {
  static constexpr std::array<std::string_view, 4> names{"Head", "Neck", "Chest", "Mixed"};
};
template <>
struct EnumNames<ReportLabel> {
  static constexpr std::array<std::string_view, 3> names{"NoFinding", "NonNodular", "ITN"};
};
template <>
struct EnumNames<EntityCategory> {
  static constexpr std::array<std::string_view, 10> names{
      "Thyroid",  "NormalFinding", "TypeOfFinding",           "NumberOfFindings",        "Size",
      "Location", "RadiologicalCharacteristic", "AssociatedFinding", "RadiologyClassification", "Recommendation"};
};

inline constexpr std::string_view kNodularSubtype = "Nodular";
inline constexpr std::string_view kNonNodularSubtype = "NonNodular";

struct ReportDoc {
  std::string report_id;
  std::string patient_id;
  Date study_date;
  Modality modality = Modality::CT;
  BodyGroup body_group = BodyGroup::Chest;
  std::string text;

  bool operator==(const ReportDoc&) const = default;
};

/// Standoff span; offsets are code-point indices into the report text, end exclusive.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  EntityCategory category = EntityCategory::Thyroid;
  std::optional<std::string> subtype;
  std::string raw_text;

  bool operator==(const EntitySpan&) const = default;
};

/// Canonical span order: start, end, category, subtype.
bool span_less(const EntitySpan& a, const EntitySpan& b);

struct AnnotatedReport {
  std::string report_id;
  std::string annotator_id;
  ReportLabel report_label = ReportLabel::NoFinding;
  std::vector<EntitySpan> spans;

  bool operator==(const AnnotatedReport&) const = default;
};

// --- corpus file: one JSON object per line ---------------------------------

/// Throws ParseError (with line number) on malformed records and
/// ValidationError on duplicate report_id.
std::vector<ReportDoc> read_corpus(std::istream& in);
std::vector<ReportDoc> read_corpus(const std::filesystem::path& path);
void write_corpus(std::ostream& out, std::span<const ReportDoc> docs);
std::string corpus_line(const ReportDoc& doc);
ReportDoc parse_corpus_line(std::string_view line, std::size_t line_no = 0);

// --- annotation file ---------------------------------------------------------

std::vector<AnnotatedReport> read_annotations(std::istream& in);
std::vector<AnnotatedReport> read_annotations(const std::filesystem::path& path);
void write_annotations(std::ostream& out, std::span<const AnnotatedReport> annotations);
std::string annotation_line(const AnnotatedReport& a);
AnnotatedReport parse_annotation_line(std::string_view line, std::size_t line_no = 0);

// --- validation --------------------------------------------------------------

struct Violation {
  std::string code;  // "start<end", "end<=length", "raw_text", "report_id", "itn-without-nodular-span"
  std::optional<std::size_t> span_index;
  std::string message;
};

/// Empty iff every span invariant and the label/span consistency rule hold.
std::vector<Violation> validate_annotation(const AnnotatedReport& a, const ReportDoc& doc);

// --- agreement ---------------------------------------------------------------

/// Cohen's kappa between two raters over the same items.
///
/// Chance agreement comes from each rater's marginal label frequencies. When both
/// raters use one and the same label throughout (p_e = p_o = 1) the result is 1.
/// Throws std::invalid_argument on empty or unequal-length input.
template <typename Label>
double cohen_kappa(std::span<const Label> a, std::span<const Label> b) {
  if (a.empty()) throw std::invalid_argument("cohen_kappa: empty input");
  if (a.size() != b.size()) throw std::invalid_argument("cohen_kappa: length mismatch");
  std::map<Label, std::pair<std::size_t, std::size_t>> marginals;
  std::size_t agree = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ++marginals[a[i]].first;
    ++marginals[b[i]].second;
    if (a[i] == b[i]) ++agree;
  }
  const double n = static_cast<double>(a.size());
  const double p_o = agree / n;
  double p_e = 0.0;
  for (const auto& [label, counts] : marginals) p_e += (counts.first / n) * (counts.second / n);
  if (p_e >= 1.0) return p_o >= 1.0 ? 1.0 : 0.0;
  return (p_o - p_e) / (1.0 - p_e);
}

template <typename Label>
double cohen_kappa(const std::vector<Label>& a, const std::vector<Label>& b) {
  return cohen_kappa(std::span<const Label>(a), std::span<const Label>(b));
}

struct PairwiseKappa {
  std::string annotator_a;
  std::string annotator_b;
  double kappa = 0.0;
};

struct AgreementResult {
  bool pass = false;
  double min_kappa = 0.0;
  std::vector<PairwiseKappa> pairs;
};

/// Passes iff every pairwise kappa is strictly greater than `threshold`.
/// Throws std::invalid_argument with fewer than two annotators.
AgreementResult agreement_gate(const std::map<std::string, std::vector<std::string>>& labels_by_annotator,
                               double threshold = 0.8);

}  // namespace itf
