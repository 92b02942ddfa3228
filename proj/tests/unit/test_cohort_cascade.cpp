#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "builders.hpp"
#include "itf/cascade.hpp"
#include "itf/codes.hpp"
#include "itf/cohort.hpp"
#include "itf/rng.hpp"
#include "itf/synthgen.hpp"

using namespace itf;
using itf::testing::day;
using itf::testing::TimelineBuilder;

namespace {

const CodeTable& codes() {
  static const CodeTable table = CodeTable::defaults();
  return table;
}

/// Index CT chest on day 800 for a patient born in 1970 with records from day 0.
TimelineBuilder adult(std::string id = "P1") {
  TimelineBuilder b(std::move(id), Date::from_ymd(1970, 6, 1), day(0));
  b.cpt("71250", day(800), std::string("R1"));
  return b;
}

CohortRow eligibility_of(const PatientTimeline& t) {
  const auto index = select_index_study(t, codes(), 1);
  REQUIRE(index);
  return apply_eligibility(t, *index, codes());
}

}  // namespace

TEST_CASE("code ranges expand to explicit sets") {
  const auto v = expand_code_range("70480-70492");
  CHECK(v.size() == 13);
  CHECK(v.front() == "70480");
  CHECK(v.back() == "70492");
  CHECK(expand_code_range("G0210-G0212") == std::vector<std::string>{"G0210", "G0211", "G0212"});
  CHECK_THROWS_AS(expand_code_range("70492-70480"), std::invalid_argument);
  CHECK(codes().contains("qualifying_imaging", CodeSystem::CPT, "70485"));
  CHECK_FALSE(codes().contains("qualifying_imaging", CodeSystem::CPT, "70493"));
  CHECK(codes().contains("charlson_chf", CodeSystem::ICD10, "I50.9"));
  CHECK(codes().contains("thyroid_cancer", CodeSystem::ICD10, "C73"));
  CHECK_FALSE(codes().contains("thyroid_cancer", CodeSystem::ICD9, "C73"));
}

TEST_CASE("code table CSV loading") {
  std::istringstream in("set_name,system,code_or_range\nx,CPT,100-102\nx,ICD10,I50*\n");
  const auto t = CodeTable::from_csv(in);
  CHECK(t.contains("x", CodeSystem::CPT, "101"));
  CHECK(t.contains("x", CodeSystem::ICD10, "I50.1"));
  CHECK_FALSE(t.contains("x", CodeSystem::ICD10, "I51"));
  std::istringstream bad("set_name,system,code_or_range\nx,XYZ,1\n");
  CHECK_THROWS(CodeTable::from_csv(bad));
}

TEST_CASE("select_index_study") {
  SUBCASE("no qualifying event") {
    const auto t = TimelineBuilder("P1", Date::from_ymd(1970, 1, 1), day(0)).icd10("I50.9", day(10));
    CHECK_FALSE(select_index_study(t, codes(), 1));
  }
  SUBCASE("single event is chosen for any seed") {
    const auto t = adult();
    for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(select_index_study(t, codes(), seed)->accession == "R1");
  }
  SUBCASE("earliest date wins") {
    auto b = adult();
    b.cpt("70490", day(900), std::string("R2"));
    CHECK(select_index_study(b, codes(), 1)->accession == "R1");
  }
  SUBCASE("same-day pick is deterministic and invariant to event order") {
    auto b = adult();
    b.cpt("70490", day(800), std::string("R2"));
    auto t = b.get();
    const auto first = select_index_study(t, codes(), 5);
    std::reverse(t.events.begin(), t.events.end());
    CHECK(select_index_study(t, codes(), 5) == first);
  }
}

TEST_CASE("apply_eligibility fixtures") {
  SUBCASE("minor") {
    TimelineBuilder b("P1", day(800) - 17 * 365, day(0));
    b.cpt("71250", day(800), std::string("R1"));
    CHECK(eligibility_of(b).eligibility == Eligibility::Minor);
  }
  SUBCASE("ten months of lookback") {
    TimelineBuilder b("P1", Date::from_ymd(1970, 1, 1), day(800) - 304);
    b.cpt("71250", day(800), std::string("R1"));
    CHECK(eligibility_of(b).eligibility == Eligibility::InsufficientLookback);
  }
  SUBCASE("exactly 365 days of lookback is enough") {
    TimelineBuilder b("P1", Date::from_ymd(1970, 1, 1), day(800) - 365);
    b.cpt("71250", day(800), std::string("R1"));
    CHECK(eligibility_of(b).eligibility == Eligibility::Eligible);
  }
  SUBCASE("prior nodule code six months before") {
    auto b = adult();
    b.icd10("E04.1", day(800) - 182);
    CHECK(eligibility_of(b).eligibility == Eligibility::PriorThyroidHistory);
  }
  SUBCASE("same-day exclusion code does not exclude") {
    auto b = adult();
    b.icd10("E04.1", day(800));
    CHECK(eligibility_of(b).eligibility == Eligibility::Eligible);
  }
  SUBCASE("clean 24-month history, age 56") {
    TimelineBuilder b("P1", day(800) - 56 * 365 - 20, day(800) - 730);
    b.cpt("71250", day(800), std::string("R1"));
    const auto row = eligibility_of(b);
    CHECK(row.eligibility == Eligibility::Eligible);
    CHECK(row.age_years == 56);
    CHECK(row.index_report_id == "R1");
  }
}

TEST_CASE("adding a pre-index exclusion code never makes a patient eligible") {
  Rng rng(13);
  const char* exclusion_codes[] = {"E04.1", "C73", "E05.00", "D34"};
  for (int trial = 0; trial < 300; ++trial) {
    const long index = 400 + static_cast<long>(rng.below(400));
    TimelineBuilder b("P" + std::to_string(trial), day(index) - static_cast<long>(rng.between(15, 80)) * 365,
                      day(static_cast<long>(rng.below(500))));
    b.cpt("71250", day(index), std::string("R"));
    if (rng.bernoulli(0.3)) b.icd10(exclusion_codes[rng.below(4)], day(index) - 1 - static_cast<long>(rng.below(300)));
    const auto before = eligibility_of(b).eligibility;
    b.icd10(exclusion_codes[rng.below(4)], day(index) - 1 - static_cast<long>(rng.below(300)));
    const auto after = eligibility_of(b).eligibility;
    if (before != Eligibility::Eligible) CHECK(after != Eligibility::Eligible);
    if (before == Eligibility::Eligible) CHECK(after == Eligibility::PriorThyroidHistory);
  }
}

TEST_CASE("charlson fixtures") {
  const Date index = day(800);
  SUBCASE("no conditions, age 45") {
    const auto t = adult().get();
    const auto s = charlson(t, index, codes());
    CHECK(s.count == 0);
    CHECK(s.weighted == 0);
    CHECK(charlson_from_conditions({}, 45).age_weighted == 0);
  }
  SUBCASE("metastatic tumor and diabetes, age 72") {
    auto b = adult();
    b.icd10("C78.0", index - 100).icd10("E11.9", index - 20);
    const auto s = charlson(b, index, codes());
    CHECK(s.count == 2);
    CHECK(s.weighted == 7);
    const auto aged = charlson_from_conditions(s.conditions, 72);
    CHECK(aged.count == 2);
    CHECK(aged.weighted == 7);
    CHECK(aged.age_weighted == 10);
  }
  SUBCASE("CHF only, age 55") {
    const auto s = charlson_from_conditions(std::vector<std::string>{"charlson_chf"}, 55);
    CHECK(s.count == 1);
    CHECK(s.weighted == 1);
    CHECK(s.age_weighted == 2);
  }
  SUBCASE("codes outside the 12-month window are ignored") {
    auto b = adult();
    b.icd10("I50.9", index - 366).icd10("C78.0", index);
    CHECK(charlson(b, index, codes()).count == 0);
  }
  CHECK(charlson_age_points(49) == 0);
  CHECK(charlson_age_points(50) == 1);
  CHECK(charlson_age_points(79) == 3);
  CHECK(charlson_age_points(85) == 4);
}

TEST_CASE("charlson sums are ordered for every condition subset") {
  const auto conds = charlson_conditions();
  REQUIRE(conds.size() == 16);
  Rng rng(2);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::string> names;
    for (const auto& c : conds) {
      if (rng.bernoulli(0.2)) names.emplace_back(c.set_name);
    }
    const auto s = charlson_from_conditions(names, static_cast<int>(rng.between(18, 95)));
    CHECK(s.count == static_cast<int>(names.size()));
    CHECK(s.weighted >= s.count);
    CHECK(s.age_weighted >= s.weighted);
  }
}

TEST_CASE("cohort eligibility matches the generator's intended eligibility") {
  GenConfig cfg;
  cfg.seed = 6;
  cfg.n_patients = 3000;
  const auto c = generate(cfg);
  const auto rows = build_cohort(c.timelines, codes(), CohortOptions{});
  const auto threaded = build_cohort(c.timelines, codes(), CohortOptions{1, 4, nullptr});
  CHECK(rows == threaded);
  std::map<std::string, Eligibility> intended;
  for (const auto& t : c.truth) intended[t.patient_id] = t.intended;
  REQUIRE(rows.size() == c.truth.size());
  CHECK(std::is_sorted(rows.begin(), rows.end(),
                       [](const CohortRow& a, const CohortRow& b) { return a.patient_id < b.patient_id; }));
  for (const auto& r : rows) {
    CHECK(r.eligibility == intended.at(r.patient_id));
    if (r.eligibility == Eligibility::Eligible) CHECK(r.age_years >= 18);
  }
}

TEST_CASE("link_ultrasound window") {
  const Date index = day(800);
  CHECK(link_ultrasound(adult().cpt("76536", index + 180), index, codes()) == index + 180);
  CHECK_FALSE(link_ultrasound(adult().cpt("76536", index + 181), index, codes()));
  CHECK_FALSE(link_ultrasound(adult().cpt("76536", index), index, codes()));
  CHECK_FALSE(link_ultrasound(adult(), index, codes()));
  CHECK(link_ultrasound(adult().cpt("76536", index + 90).cpt("76536", index + 20), index, codes()) == index + 20);
}

TEST_CASE("link_downstream window and anchoring") {
  const Date us = day(900);
  CHECK(link_downstream(adult().cpt("60100", us + 30), us, codes()).biopsy);
  CHECK_FALSE(link_downstream(adult().cpt("60240", us + 200), us, codes()).total_thyroidectomy);
  const auto f = link_downstream(adult().cpt("60240", us + 180).cpt("60220", us + 50).icd10("E04.1", us + 1), us, codes());
  CHECK(f.total_thyroidectomy);
  CHECK(f.partial_thyroidectomy);
  CHECK(f.nodule_dx);
  CHECK(f.first_surgery == us + 50);
  CHECK(link_downstream(adult().cpt("60100", us + 30), std::nullopt, codes()) == DownstreamFlags{});
}

TEST_CASE("confirm_cancer truth table") {
  const auto none = std::optional<Date>{};
  auto basis = [&](const PatientTimeline& t, std::optional<Date> surgery) { return confirm_cancer(t, surgery, codes()); };
  CHECK(basis(adult().icd10("C73", day(120)), day(100)) == CancerConfirmation{true, CancerBasis::PostSurgerySingleCode});
  CHECK(basis(adult().icd10("C73", day(10)).icd10("C73", day(40)), none) == CancerConfirmation{});
  CHECK(basis(adult().icd10("C73", day(10)).icd10("C73", day(40)).icd10("C73", day(90)), none) ==
        CancerConfirmation{true, CancerBasis::ThreeCodes});
  CHECK(basis(adult().icd10("C73", day(90)), day(100)) == CancerConfirmation{});
  CHECK(basis(adult().icd10("C73", day(100)), day(100)) == CancerConfirmation{});
  CHECK(basis(adult().icd10("C73", day(10)).icd10("C73", day(40)).icd10("C73", day(90)), day(100)) ==
        CancerConfirmation{true, CancerBasis::ThreeCodes});
  CHECK(basis(adult().icd10("C73", day(10)).event(CodeSystem::ICD9, "193", day(10)).icd10("C73", day(40)), none) ==
        CancerConfirmation{});
}

TEST_CASE("link_outcomes: removing the ultrasound clears every downstream flag") {
  GenConfig cfg;
  cfg.seed = 12;
  cfg.n_patients = 2000;
  const auto c = generate(cfg);
  const auto rows = build_cohort(c.timelines, codes(), CohortOptions{});
  std::map<std::string, const PatientTimeline*> by_id;
  for (const auto& t : c.timelines) by_id[t.patient_id] = &t;
  int with_ultrasound = 0;
  for (const auto& r : rows) {
    if (r.eligibility != Eligibility::Eligible) continue;
    const auto& t = *by_id.at(r.patient_id);
    const auto o = link_outcomes(r, t, false, codes());
    if (!o.ultrasound_date) {
      CHECK_FALSE((o.biopsy || o.nodule_dx || o.partial_thyroidectomy || o.total_thyroidectomy || o.cancer_confirmed));
      continue;
    }
    ++with_ultrasound;
    CHECK((!o.cancer_confirmed || o.cancer_basis != CancerBasis::None));
    auto stripped = t;
    std::erase_if(stripped.events, [&](const CodedEvent& e) { return codes().contains("ultrasound_thyroid", e); });
    const auto s = link_outcomes(r, stripped, false, codes());
    CHECK_FALSE(s.ultrasound_date);
    CHECK_FALSE((s.biopsy || s.nodule_dx || s.partial_thyroidectomy || s.total_thyroidectomy || s.cancer_confirmed));
  }
  CHECK(with_ultrasound > 0);
}

TEST_CASE("outcomes CSV round trip") {
  CascadeOutcomes o;
  o.patient_id = "P9";
  o.had_itf = true;
  o.ultrasound_date = day(5);
  o.biopsy = true;
  o.cancer_confirmed = true;
  o.cancer_basis = CancerBasis::ThreeCodes;
  CascadeOutcomes empty;
  empty.patient_id = "P10";
  std::ostringstream out;
  write_outcomes_csv(out, std::vector<CascadeOutcomes>{o, empty});
  const auto path = std::filesystem::temp_directory_path() / "itf_unit_outcomes.csv";
  {
    std::ofstream f(path);
    f << out.str();
  }
  const auto back = read_outcomes_csv(path);
  std::filesystem::remove(path);
  REQUIRE(back.size() == 2);
  CHECK(back[0] == o);
  CHECK(back[1].patient_id == "P10");
}
