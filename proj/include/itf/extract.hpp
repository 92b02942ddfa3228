#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itf/corpus.hpp"
#include "itf/detect.hpp"

namespace itf {

enum class NoduleLocation { Right, Left, Bilateral, Isthmus };
enum class SizeBin { UpTo1, From1To2, From2To3, From3To4, Over4 };
enum class Density { Low, Heterogeneous, High };
enum class Enhancement { Low, High, Heterogeneous, Enhancing };
enum class Attenuation { Low, Heterogeneous, High, Unspecified };
enum class MetabolicActivity { Hypermetabolic, LowMetabolic, MidMetabolic, NonMetabolic, Physiological, Ambiguous };
enum class MetabolicDistribution { Diffuse, Focal, NotDescribed };
enum class RecommendationKind { Ultrasound, NonUltrasoundImaging, Other };

template <>
struct EnumNames<NoduleLocation> {
  static constexpr std::array<std::string_view, 4> names{"Right", "Left", "Bilateral", "Isthmus"};
};
template <>
struct EnumNames<SizeBin> {
  static constexpr std::array<std::string_view, 5> names{"≤1.0", "1.1–2.0", "2.1–3.0", "3.1–4.0", ">4.0"};
};
template <>
struct EnumNames<Density> {
  static constexpr std::array<std::string_view, 3> names{"Low", "Heterogeneous", "High"};
};
template <>
struct EnumNames<Enhancement> {
  static constexpr std::array<std::string_view, 4> names{"Low", "High", "Heterogeneous", "Enhancing"};
};
template <>
struct EnumNames<Attenuation> {
  static constexpr std::array<std::string_view, 4> names{"Low", "Heterogeneous", "High", "Unspecified"};
};
template <>
struct EnumNames<MetabolicActivity> {
  static constexpr std::array<std::string_view, 6> names{"Hypermetabolic", "LowMetabolic", "MidMetabolic",
                                                         "NonMetabolic",   "Physiological", "Ambiguous"};
};
template <>
struct EnumNames<MetabolicDistribution> {
  static constexpr std::array<std::string_view, 3> names{"Diffuse", "Focal", "NotDescribed"};
};
template <>
struct EnumNames<RecommendationKind> {
  static constexpr std::array<std::string_view, 3> names{"Ultrasound", "NonUltrasoundImaging", "Other"};
};

/// A size in centimetres held as an integer number of tenths.
class SizeCm {
 public:
  /// Rounds half away from zero to one decimal. Throws std::invalid_argument unless cm > 0.
  static SizeCm round(double cm);
  static SizeCm from_tenths(long tenths) { return SizeCm(tenths); }

  long tenths() const noexcept { return tenths_; }
  double cm() const noexcept { return static_cast<double>(tenths_) / 10.0; }
  auto operator<=>(const SizeCm&) const = default;

 private:
  explicit SizeCm(long tenths) : tenths_(tenths) {}
  long tenths_ = 0;
};

struct SizeMeasurement {
  std::optional<SizeCm> value;  // absent for qualitative sizes
  std::optional<std::string> qualitative;
};

/// "X cm" -> X, "Y mm" -> Y/10, "A x B cm" -> max(A, B); "tiny"/"small"/"large"/"massive"
/// give a qualitative measurement without a value. Returns nullopt when no size is present.
std::optional<SizeMeasurement> parse_size(std::string_view fragment);

/// Bins the one-decimal value: ≤1.0 | 1.1–2.0 | 2.1–3.0 | 3.1–4.0 | >4.0.
SizeBin bin_size(SizeCm size);
/// Rounds first. Throws std::invalid_argument for non-positive sizes.
SizeBin bin_size(double size_cm);

/// Explicit bilateral terms, or both sides named, give Bilateral; Isthmus only when it is
/// the sole location. Non-Location spans are ignored; nullopt when none remain.
std::optional<NoduleLocation> infer_bilaterality(std::span<const EntitySpan> spans);

struct FindingResult {
  std::string report_id;
  ReportLabel label = ReportLabel::NoFinding;
  std::optional<NoduleLocation> location;
  std::optional<SizeCm> size;
  std::optional<SizeBin> size_bin;
  std::optional<std::string> qualitative_size;
  std::optional<Density> density;
  std::optional<Enhancement> enhancement;
  std::optional<bool> calcified;
  std::optional<Attenuation> attenuation;
  std::optional<MetabolicActivity> metabolic_activity;
  std::optional<MetabolicDistribution> metabolic_distribution;
  std::optional<RecommendationKind> recommendation;
  std::vector<EntitySpan> spans;
  std::vector<std::string> flags;
  std::vector<std::string> warnings;

  bool has_nodule_attributes() const;
};

/// Span category of a stage-2 vocabulary kind. Throws std::invalid_argument for
/// screening kinds (gate, normal, finding terms, cues).
EntityCategory attribute_category(TermKind kind);
/// Span subtype of a stage-2 term: characteristics are prefixed with their family
/// ("Density:Low"); other kinds keep the lexicon subtype.
std::string attribute_subtype(TermKind kind, std::string_view subtype);

/// Stage-2 attribute extraction. Non-ITN reports pass through with every attribute absent.
///
/// Attributes come from thyroid-context sentences that hold a nodular term (all
/// thyroid-context sentences if none do). Recommendations are also read from the
/// sentence right after a thyroid-context sentence. The largest measured size wins.
FindingResult extract_entities(const ReportDoc& doc, const Stage1Result& stage1, const ReportScanner& scanner);
FindingResult extract_entities(const ReportDoc& doc, const Stage1Result& stage1);

/// Runs both stages over a corpus; output order equals input order for any thread count.
std::vector<FindingResult> run_pipeline(std::span<const ReportDoc> docs, const DetectorBackend& backend,
                                        const ReportScanner& scanner, unsigned threads = 1);

std::string finding_line(const FindingResult& f);
/// Throws ParseError.
FindingResult parse_finding_line(std::string_view line, std::size_t line_no = 0);
std::vector<FindingResult> read_findings(const std::filesystem::path& path);

}  // namespace itf
