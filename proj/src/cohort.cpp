#include "itf/cohort.hpp"

#include <algorithm>
#include <ostream>

#include "itf/csv.hpp"
#include "itf/errors.hpp"
#include "itf/parallel.hpp"
#include "itf/rng.hpp"

namespace itf {
namespace {

constexpr CharlsonCondition kConditions[] = {
    {"charlson_aids", "AIDS", 6},
    {"charlson_cerebrovascular", "Cerebrovascular Disease", 1},
    {"charlson_chf", "CHF", 1},
    {"charlson_cpd", "CPD", 1},
    {"charlson_dementia", "Dementia", 1},
    {"charlson_diabetes", "Diabetes", 1},
    {"charlson_diabetes_organ_damage", "Diabetes Organ Damage", 2},
    {"charlson_hemiplegia", "Hemiplegia", 2},
    {"charlson_liver_disease", "Liver Disease", 3},
    {"charlson_metastatic_solid_tumor", "Metastatic Solid Tumor", 6},
    {"charlson_mild_liver_disease", "Mild Liver Disease", 1},
    {"charlson_other_cancer", "Other Cancer", 2},
    {"charlson_peripheral_vascular", "Peripheral Vascular Disease", 1},
    {"charlson_renal", "Renal Disease", 2},
    {"charlson_rheumatologic", "Rheumatologic Disease", 1},
    {"charlson_ulcer", "Ulcer", 1},
};

constexpr const char* kDemographicKeys[] = {"race",       "ethnicity", "language", "marital",
                                            "education",  "employment", "payor",   "financial_risk"};

template <typename E>
std::string opt_name(const std::optional<E>& v) {
  return v ? std::string(to_string(*v)) : std::string();
}

}  // namespace

std::span<const CharlsonCondition> charlson_conditions() { return kConditions; }

std::optional<CodedEvent> select_index_study(const PatientTimeline& timeline, const CodeTable& codes,
                                             std::uint64_t seed) {
  std::vector<CodedEvent> qualifying;
  for (const auto& e : timeline.events) {
    if (codes.contains("qualifying_imaging", e)) qualifying.push_back(e);
  }
  if (qualifying.empty()) return std::nullopt;
  std::sort(qualifying.begin(), qualifying.end(), event_less);
  const Date first = qualifying.front().date;
  std::size_t same_day = 0;
  while (same_day < qualifying.size() && qualifying[same_day].date == first) ++same_day;
  Rng rng(mix64(seed ^ hash64(timeline.patient_id)));
  return qualifying[rng.below(same_day)];
}

int charlson_age_points(int age_years) {
  if (age_years < 50) return 0;
  return std::min(4, (age_years - 40) / 10);
}

CharlsonScore charlson_from_conditions(std::span<const std::string> set_names, int age_years) {
  CharlsonScore s;
  for (const auto& c : kConditions) {
    if (std::find(set_names.begin(), set_names.end(), c.set_name) == set_names.end()) continue;
    ++s.count;
    s.weighted += c.weight;
    s.conditions.emplace_back(c.set_name);
  }
  s.age_weighted = s.weighted + charlson_age_points(age_years);
  return s;
}

CharlsonScore charlson(const PatientTimeline& timeline, Date index_date, const CodeTable& codes) {
  std::vector<std::string> present;
  for (const auto& c : kConditions) {
    const bool hit = std::any_of(timeline.events.begin(), timeline.events.end(), [&](const CodedEvent& e) {
      return e.date >= index_date - kLookbackDays && e.date < index_date && codes.contains(c.set_name, e);
    });
    if (hit) present.emplace_back(c.set_name);
  }
  return charlson_from_conditions(present, age_in_years(timeline.birth_date, index_date));
}

CohortRow apply_eligibility(const PatientTimeline& timeline, const CodedEvent& index, const CodeTable& codes) {
  CohortRow row;
  row.patient_id = timeline.patient_id;
  row.index_report_id = index.accession.value_or("");
  row.index_date = index.date;
  row.age_years = age_in_years(timeline.birth_date, index.date);
  row.sex = timeline.sex;
  row.bmi = timeline.bmi;
  row.demographics = timeline.demographics;
  row.charlson = charlson(timeline, index.date, codes);

  const bool prior = std::any_of(timeline.events.begin(), timeline.events.end(), [&](const CodedEvent& e) {
    if (e.date >= index.date) return false;
    return std::any_of(std::begin(kExclusionSets), std::end(kExclusionSets),
                       [&](std::string_view set) { return codes.contains(set, e); });
  });
  if (row.age_years < 18) {
    row.eligibility = Eligibility::Minor;
  } else if (index.date - timeline.first_record_date < kLookbackDays) {
    row.eligibility = Eligibility::InsufficientLookback;
  } else if (prior) {
    row.eligibility = Eligibility::PriorThyroidHistory;
  }
  return row;
}

std::vector<CohortRow> build_cohort(std::span<const PatientTimeline> timelines, const CodeTable& codes,
                                    const CohortOptions& options) {
  std::vector<std::optional<CohortRow>> slots(timelines.size());
  parallel_for(timelines.size(), options.threads, [&](std::size_t i) {
    auto index = select_index_study(timelines[i], codes, options.seed);
    if (!index) return;
    auto row = apply_eligibility(timelines[i], *index, codes);
    if (options.reports && index->accession) {
      if (auto it = options.reports->find(*index->accession); it != options.reports->end()) {
        row.modality = it->second->modality;
        row.body_group = it->second->body_group;
      }
    }
    slots[i] = std::move(row);
  });
  std::vector<CohortRow> rows;
  for (auto& s : slots) {
    if (s) rows.push_back(std::move(*s));
  }
  std::sort(rows.begin(), rows.end(), [](const CohortRow& a, const CohortRow& b) { return a.patient_id < b.patient_id; });
  return rows;
}

std::vector<std::string> cohort_header() {
  std::vector<std::string> h = {"patient_id",     "index_report_id",   "index_date",          "age_years",
                                "sex",            "bmi",               "modality",            "body_group",
                                "charlson_count", "charlson_weighted", "charlson_age_weighted", "eligibility"};
  for (const char* k : kDemographicKeys) h.emplace_back(k);
  return h;
}

std::vector<std::string> cohort_fields(const CohortRow& row) {
  std::vector<std::string> f = {row.patient_id,
                                row.index_report_id,
                                row.index_date.iso(),
                                std::to_string(row.age_years),
                                std::string(to_string(row.sex)),
                                row.bmi ? format_number(*row.bmi) : std::string(),
                                opt_name(row.modality),
                                opt_name(row.body_group),
                                std::to_string(row.charlson.count),
                                std::to_string(row.charlson.weighted),
                                std::to_string(row.charlson.age_weighted),
                                std::string(to_string(row.eligibility))};
  for (const char* k : kDemographicKeys) {
    auto it = row.demographics.find(k);
    f.push_back(it == row.demographics.end() ? std::string() : it->second);
  }
  return f;
}

void write_cohort_csv(std::ostream& out, std::span<const CohortRow> rows) {
  out << csv_row(cohort_header()) << '\n';
  for (const auto& r : rows) out << csv_row(cohort_fields(r)) << '\n';
}

std::vector<CohortRow> read_cohort_csv(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  std::vector<CohortRow> rows;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const std::size_t line = i + 2;
    auto need = [&](std::string_view col) -> const std::string& { return t.at(i, col); };
    auto to_int = [&](std::string_view col) {
      try {
        return std::stoi(need(col));
      } catch (const std::exception&) {
        throw ParseError(line, "column '" + std::string(col) + "' is not an integer");
      }
    };
    CohortRow r;
    r.patient_id = need("patient_id");
    r.index_report_id = need("index_report_id");
    try {
      r.index_date = Date::parse(need("index_date"));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line, e.what());
    }
    r.age_years = to_int("age_years");
    auto sex = enum_from_string<Sex>(need("sex"));
    if (!sex) throw ParseError(line, "unknown sex '" + need("sex") + "'");
    r.sex = *sex;
    if (!need("bmi").empty()) {
      try {
        r.bmi = std::stod(need("bmi"));
      } catch (const std::exception&) {
        throw ParseError(line, "bmi is not a number");
      }
    }
    if (!need("modality").empty()) {
      r.modality = enum_from_string<Modality>(need("modality"));
      if (!r.modality) throw ParseError(line, "unknown modality '" + need("modality") + "'");
    }
    if (!need("body_group").empty()) {
      r.body_group = enum_from_string<BodyGroup>(need("body_group"));
      if (!r.body_group) throw ParseError(line, "unknown body_group '" + need("body_group") + "'");
    }
    r.charlson.count = to_int("charlson_count");
    r.charlson.weighted = to_int("charlson_weighted");
    r.charlson.age_weighted = to_int("charlson_age_weighted");
    auto elig = enum_from_string<Eligibility>(need("eligibility"));
    if (!elig) throw ParseError(line, "unknown eligibility '" + need("eligibility") + "'");
    r.eligibility = *elig;
    for (const char* k : kDemographicKeys) {
      if (auto v = t.get(i, k); v && !v->empty()) r.demographics[k] = *v;
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace itf
