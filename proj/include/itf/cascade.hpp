#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itf/codes.hpp"
#include "itf/cohort.hpp"
#include "itf/extract.hpp"
#include "itf/timeline.hpp"

namespace itf {

enum class CancerBasis { PostSurgerySingleCode, ThreeCodes, None };

template <>
struct EnumNames<CancerBasis> {
  static constexpr std::array<std::string_view, 3> names{"PostSurgerySingleCode", "ThreeCodes", "None"};
};

inline constexpr long kFollowUpDays = 180;

/// Half-open day window (after, until]: after < date <= until.
struct DateWindow {
  Date after;
  Date until;
  bool contains(Date d) const { return after < d && d <= until; }
};

struct CascadeOutcomes {
  std::string patient_id;
  bool had_itf = false;
  std::optional<Date> ultrasound_date;
  bool nodule_dx = false;
  bool biopsy = false;
  bool partial_thyroidectomy = false;
  bool total_thyroidectomy = false;
  bool cancer_confirmed = false;
  CancerBasis cancer_basis = CancerBasis::None;

  bool operator==(const CascadeOutcomes&) const = default;
};

/// Earliest thyroid ultrasound in (index, index + 180].
std::optional<Date> link_ultrasound(const PatientTimeline& timeline, Date index_date, const CodeTable& codes);

struct DownstreamFlags {
  bool nodule_dx = false;
  bool biopsy = false;
  bool partial_thyroidectomy = false;
  bool total_thyroidectomy = false;
  std::optional<Date> first_surgery;

  bool operator==(const DownstreamFlags&) const = default;
};

/// Flags for events in (ultrasound, ultrasound + 180]; all false without an ultrasound.
DownstreamFlags link_downstream(const PatientTimeline& timeline, std::optional<Date> ultrasound_date,
                                const CodeTable& codes);

struct CancerConfirmation {
  bool confirmed = false;
  CancerBasis basis = CancerBasis::None;

  bool operator==(const CancerConfirmation&) const = default;
};

/// A cancer code strictly after the surgery date confirms on the surgical basis;
/// otherwise cancer codes on three or more distinct dates confirm. Only codes inside
/// `window` count when one is given.
CancerConfirmation confirm_cancer(const PatientTimeline& timeline, std::optional<Date> surgery_date,
                                  const CodeTable& codes, std::optional<DateWindow> window = std::nullopt);

CascadeOutcomes link_outcomes(const CohortRow& row, const PatientTimeline& timeline, bool had_itf,
                              const CodeTable& codes);

/// Eligible rows only, in cohort order. `itf_by_report` maps report_id to an ITF call;
/// reports missing from it count as no ITF. Throws ValidationError for rows whose
/// patient has no timeline.
std::vector<CascadeOutcomes> link_cohort(std::span<const CohortRow> cohort, std::span<const PatientTimeline> timelines,
                                         const std::map<std::string, bool>& itf_by_report, const CodeTable& codes,
                                         unsigned threads = 1);

std::vector<std::string> outcomes_header();
void write_outcomes_csv(std::ostream& out, std::span<const CascadeOutcomes> rows);
std::vector<CascadeOutcomes> read_outcomes_csv(const std::filesystem::path& path);

}  // namespace itf
