#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itf/codes.hpp"
#include "itf/corpus.hpp"
#include "itf/timeline.hpp"

namespace itf {

enum class Eligibility { Eligible, Minor, InsufficientLookback, PriorThyroidHistory };

template <>
struct EnumNames<Eligibility> {
  static constexpr std::array<std::string_view, 4> names{"Eligible", "Minor", "InsufficientLookback",
                                                         "PriorThyroidHistory"};
};

inline constexpr long kLookbackDays = 365;

struct CharlsonCondition {
  std::string_view set_name;  // code-table set
  std::string_view label;
  int weight;
};

/// The sixteen comorbidity flags with their 1987 weights.
std::span<const CharlsonCondition> charlson_conditions();

struct CharlsonScore {
  int count = 0;
  int weighted = 0;
  int age_weighted = 0;
  std::vector<std::string> conditions;  // set names, table order

  bool operator==(const CharlsonScore&) const = default;
};

struct CohortRow {
  std::string patient_id;
  std::string index_report_id;
  Date index_date;
  int age_years = 0;
  Sex sex = Sex::Female;
  std::optional<double> bmi;
  std::optional<Modality> modality;
  std::optional<BodyGroup> body_group;
  CharlsonScore charlson;
  Eligibility eligibility = Eligibility::Eligible;
  std::map<std::string, std::string> demographics;

  bool operator==(const CohortRow&) const = default;
};

/// Earliest date holding a qualifying imaging event; same-day ties are broken by a
/// uniform draw seeded from (seed, patient_id). Events are re-sorted first, so the pick
/// does not depend on input order.
std::optional<CodedEvent> select_index_study(const PatientTimeline& timeline, const CodeTable& codes,
                                             std::uint64_t seed);

/// Points added for age at index: 50-59 +1, 60-69 +2, 70-79 +3, 80+ +4.
int charlson_age_points(int age_years);

/// Flags from codes dated in [index - 365, index), no hierarchy between related conditions.
CharlsonScore charlson(const PatientTimeline& timeline, Date index_date, const CodeTable& codes);
CharlsonScore charlson_from_conditions(std::span<const std::string> set_names, int age_years);

/// Checks, in order: Minor (age < 18), InsufficientLookback (fewer than 365 days of
/// history), PriorThyroidHistory (exclusion-set code strictly before the index date).
CohortRow apply_eligibility(const PatientTimeline& timeline, const CodedEvent& index, const CodeTable& codes);

struct CohortOptions {
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Fills modality and body_group through the index event's accession.
  const std::map<std::string, const ReportDoc*>* reports = nullptr;
};

/// One row per patient with a qualifying study, sorted by patient_id.
std::vector<CohortRow> build_cohort(std::span<const PatientTimeline> timelines, const CodeTable& codes,
                                    const CohortOptions& options);

std::vector<std::string> cohort_header();
std::vector<std::string> cohort_fields(const CohortRow& row);
void write_cohort_csv(std::ostream& out, std::span<const CohortRow> rows);
/// Throws ParseError.
std::vector<CohortRow> read_cohort_csv(const std::filesystem::path& path);

}  // namespace itf
