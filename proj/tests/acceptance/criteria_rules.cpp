#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "builders.hpp"
#include "criteria.hpp"
#include "itf/cascade.hpp"
#include "itf/codes.hpp"
#include "itf/cohort.hpp"
#include "itf/rng.hpp"
#include "itf/stats/diagnostics.hpp"

namespace itf::acceptance {
namespace {

using testing::day;
using testing::TimelineBuilder;

const CodeTable& codes() {
  static const CodeTable table = CodeTable::defaults();
  return table;
}

TimelineBuilder adult(const std::string& id, Date index) {
  TimelineBuilder b(id, Date::from_ymd(1960, 3, 1), index - 1000);
  b.cpt("71250", index, std::string(id + "-idx"));
  return b;
}

enum class Kind { Ultrasound, Nodule, Biopsy, Partial, Total, Cancer, Unrelated };

struct CodeKind {
  CodeSystem system;
  const char* code;
  Kind kind;
};

// Hand-kept code meanings for the oracle; independent of the code table.
const CodeKind kCodes[] = {
    {CodeSystem::CPT, "76536", Kind::Ultrasound},   {CodeSystem::ICD10, "E04.1", Kind::Nodule},
    {CodeSystem::ICD10, "E04.2", Kind::Nodule},     {CodeSystem::CPT, "60100", Kind::Biopsy},
    {CodeSystem::CPT, "60220", Kind::Partial},      {CodeSystem::CPT, "60240", Kind::Total},
    {CodeSystem::ICD10, "C73", Kind::Cancer},       {CodeSystem::ICD10, "I50.9", Kind::Unrelated},
    {CodeSystem::CPT, "99213", Kind::Unrelated},
};

struct Planted {
  long offset;  // days after index
  Kind kind;
};

/// Day-by-day reference for link_outcomes on a timeline whose events are all planted
/// relative to the index date.
CascadeOutcomes oracle(const std::vector<Planted>& events, Date index) {
  CascadeOutcomes o;
  auto on_day = [&](long d, Kind k) {
    return std::any_of(events.begin(), events.end(), [&](const Planted& p) { return p.offset == d && p.kind == k; });
  };
  std::optional<long> us;
  for (long d = 1; d <= 180 && !us; ++d) {
    if (on_day(d, Kind::Ultrasound)) us = d;
  }
  if (!us) return o;
  o.ultrasound_date = index + *us;
  std::optional<long> surgery;
  std::set<long> cancer_days;
  for (long d = *us + 1; d <= *us + 180; ++d) {
    o.nodule_dx = o.nodule_dx || on_day(d, Kind::Nodule);
    o.biopsy = o.biopsy || on_day(d, Kind::Biopsy);
    o.partial_thyroidectomy = o.partial_thyroidectomy || on_day(d, Kind::Partial);
    o.total_thyroidectomy = o.total_thyroidectomy || on_day(d, Kind::Total);
    if (!surgery && (on_day(d, Kind::Partial) || on_day(d, Kind::Total))) surgery = d;
    if (on_day(d, Kind::Cancer)) cancer_days.insert(d);
  }
  if (surgery && !cancer_days.empty() && *cancer_days.rbegin() > *surgery) {
    o.cancer_confirmed = true;
    o.cancer_basis = CancerBasis::PostSurgerySingleCode;
  } else if (cancer_days.size() >= 3) {
    o.cancer_confirmed = true;
    o.cancer_basis = CancerBasis::ThreeCodes;
  }
  return o;
}

}  // namespace

Verdict cascade_rules() {
  Verdict v;
  const Date index = day(1000);

  // confirm_cancer truth table over (surgery present, codes after surgery, distinct code dates).
  struct Case {
    const char* what;
    std::vector<long> cancer_days;
    std::optional<long> surgery;
    CancerConfirmation expected;
  };
  const Case cases[] = {
      {"no codes", {}, std::nullopt, {}},
      {"no codes, surgery", {}, 100, {}},
      {"one code, no surgery", {50}, std::nullopt, {}},
      {"two dates, no surgery", {10, 40}, std::nullopt, {}},
      {"three dates, no surgery", {10, 40, 90}, std::nullopt, {true, CancerBasis::ThreeCodes}},
      {"three codes on two dates", {10, 10, 40}, std::nullopt, {}},
      {"one code after surgery", {120}, 100, {true, CancerBasis::PostSurgerySingleCode}},
      {"one code on surgery day", {100}, 100, {}},
      {"one code before surgery", {90}, 100, {}},
      {"three dates before surgery", {10, 40, 90}, 100, {true, CancerBasis::ThreeCodes}},
      {"three dates spanning surgery", {10, 40, 190}, 100, {true, CancerBasis::PostSurgerySingleCode}},
  };
  for (const auto& c : cases) {
    auto b = adult("P", index);
    for (long d : c.cancer_days) b.icd10("C73", index + d);
    const auto got =
        confirm_cancer(b, c.surgery ? std::optional<Date>(index + *c.surgery) : std::nullopt, codes());
    v.require(got == c.expected, std::string("confirm_cancer: ") + c.what);
  }

  // 180 / 181 day boundaries for the ultrasound and every downstream window.
  {
    v.require(link_ultrasound(adult("P", index).cpt("76536", index + 180), index, codes()) == index + 180,
              "ultrasound on day 180 not linked");
    v.require(!link_ultrasound(adult("P", index).cpt("76536", index + 181), index, codes()),
              "ultrasound on day 181 linked");
    v.require(!link_ultrasound(adult("P", index).cpt("76536", index), index, codes()), "same-day ultrasound linked");
    const Date us = index + 30;
    for (const auto& [code, system, label] :
         {std::tuple{"E04.1", CodeSystem::ICD10, "nodule"}, std::tuple{"60100", CodeSystem::CPT, "biopsy"},
          std::tuple{"60220", CodeSystem::CPT, "partial"}, std::tuple{"60240", CodeSystem::CPT, "total"}}) {
      for (long offset : {180L, 181L}) {
        auto b = adult("P", index);
        b.event(system, code, us + offset);
        const auto f = link_downstream(b, us, codes());
        const bool any = f.nodule_dx || f.biopsy || f.partial_thyroidectomy || f.total_thyroidectomy;
        v.require(any == (offset == 180),
                  std::string(label) + " on day " + std::to_string(offset) + " after ultrasound");
      }
    }
  }

  // Window soundness: random timelines against the day-by-day oracle.
  Rng rng(180);
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::string id = "T" + std::to_string(trial);
    auto b = adult(id, index);
    std::vector<Planted> planted;
    const int n_events = static_cast<int>(rng.between(0, 12));
    for (int k = 0; k < n_events; ++k) {
      const auto& ck = kCodes[rng.below(std::size(kCodes))];
      const long offset = rng.between(-30, 400);
      b.event(ck.system, ck.code, index + offset);
      planted.push_back({offset, ck.kind});
    }
    CohortRow row;
    row.patient_id = id;
    row.index_date = index;
    auto expected = oracle(planted, index);
    expected.patient_id = id;
    expected.had_itf = trial % 2 == 0;
    const auto got = link_outcomes(row, b, expected.had_itf, codes());
    if (!(got == expected)) ++mismatches;
  }
  v.note(std::to_string(mismatches) + " of 1000 random timelines disagree with the oracle");
  v.require(mismatches == 0, std::to_string(mismatches) + " oracle mismatches");
  return v;
}

Verdict cohort_rules() {
  Verdict v;
  const Date index = Date::from_ymd(2021, 6, 15);

  // Eligibility over age {17, 18} x lookback {364, 365} x exclusion {none, before, same day}.
  for (int age : {17, 18}) {
    for (long lookback : {364L, 365L}) {
      for (int exclusion = 0; exclusion < 3; ++exclusion) {
        const Date birth = age == 18 ? Date::from_ymd(2003, 6, 15) : Date::from_ymd(2003, 6, 16);
        TimelineBuilder b("P", birth, index - lookback);
        b.cpt("71250", index, std::string("R1"));
        if (exclusion == 1) b.icd10("E04.1", index - 10);
        if (exclusion == 2) b.icd10("E04.1", index);
        const auto chosen = select_index_study(b, codes(), 1);
        if (!chosen) {
          v.require(false, "no index study");
          continue;
        }
        const auto row = apply_eligibility(b, *chosen, codes());
        Eligibility expected = Eligibility::Eligible;
        if (age < 18) {
          expected = Eligibility::Minor;
        } else if (lookback < 365) {
          expected = Eligibility::InsufficientLookback;
        } else if (exclusion == 1) {
          expected = Eligibility::PriorThyroidHistory;
        }
        v.require(row.age_years == age, "age " + std::to_string(age) + " computed as " + std::to_string(row.age_years));
        v.require(row.eligibility == expected, "age " + std::to_string(age) + ", lookback " + std::to_string(lookback) +
                                                   ", exclusion " + std::to_string(exclusion) + ": got " +
                                                   std::string(to_string(row.eligibility)));
      }
    }
  }

  // Same-day studies: the pick is uniform over the two candidates.
  {
    const int n = 10000;
    int first = 0;
    for (int i = 0; i < n; ++i) {
      const std::string id = "D" + std::to_string(i);
      auto b = adult(id, index);
      b.cpt("70490", index, std::string(id + "-b"));
      const auto chosen = select_index_study(b, codes(), 1);
      if (chosen && chosen->accession == b.get().events.front().accession) ++first;
    }
    const double expected = n / 2.0;
    const double chi2 = 2.0 * (first - expected) * (first - expected) / expected;
    const double p = stats::chi_square_sf(chi2, 1.0);
    v.note("same-day pick of the first candidate " + std::to_string(first) + "/" + std::to_string(n) +
           ", chi2 p = " + fmt(p));
    v.require(p > 0.01, "same-day choice is not uniform (p = " + fmt(p) + ")");
  }

  // Charlson fixtures.
  {
    const auto none = charlson_from_conditions({}, 45);
    v.require(none.count == 0 && none.weighted == 0 && none.age_weighted == 0, "no conditions at 45");
    auto b = adult("C", index);
    b.icd10("C78.0", index - 100).icd10("E11.9", index - 20);
    const auto base = charlson(b, index, codes());
    const auto two = charlson_from_conditions(base.conditions, 72);
    v.require(two.count == 2 && two.weighted == 7 && two.age_weighted == 10,
              "metastatic tumor and diabetes at 72: (" + std::to_string(two.count) + ", " +
                  std::to_string(two.weighted) + ", " + std::to_string(two.age_weighted) + ")");
    const auto chf = charlson_from_conditions(std::vector<std::string>{"charlson_chf"}, 55);
    v.require(chf.count == 1 && chf.weighted == 1 && chf.age_weighted == 2, "CHF at 55");
  }
  return v;
}

}  // namespace itf::acceptance
