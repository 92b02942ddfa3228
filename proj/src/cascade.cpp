#include "itf/cascade.hpp"

#include <algorithm>
#include <ostream>
#include <set>

#include "itf/csv.hpp"
#include "itf/errors.hpp"
#include "itf/parallel.hpp"

namespace itf {
namespace {

bool in_set(const CodeTable& codes, std::string_view set, const CodedEvent& e) { return codes.contains(set, e); }

std::string flag(bool b) { return b ? "1" : "0"; }

}  // namespace

std::optional<Date> link_ultrasound(const PatientTimeline& timeline, Date index_date, const CodeTable& codes) {
  const DateWindow window{index_date, index_date + kFollowUpDays};
  std::optional<Date> best;
  for (const auto& e : timeline.events) {
    if (window.contains(e.date) && in_set(codes, "ultrasound_thyroid", e) && (!best || e.date < *best)) best = e.date;
  }
  return best;
}

DownstreamFlags link_downstream(const PatientTimeline& timeline, std::optional<Date> ultrasound_date,
                                const CodeTable& codes) {
  DownstreamFlags f;
  if (!ultrasound_date) return f;
  const DateWindow window{*ultrasound_date, *ultrasound_date + kFollowUpDays};
  for (const auto& e : timeline.events) {
    if (!window.contains(e.date)) continue;
    if (in_set(codes, "thyroid_nodule", e)) f.nodule_dx = true;
    if (in_set(codes, "biopsy", e)) f.biopsy = true;
    const bool partial = in_set(codes, "partial_thyroidectomy", e);
    const bool total = in_set(codes, "thyroidectomy", e);
    f.partial_thyroidectomy = f.partial_thyroidectomy || partial;
    f.total_thyroidectomy = f.total_thyroidectomy || total;
    if ((partial || total) && (!f.first_surgery || e.date < *f.first_surgery)) f.first_surgery = e.date;
  }
  return f;
}

CancerConfirmation confirm_cancer(const PatientTimeline& timeline, std::optional<Date> surgery_date,
                                  const CodeTable& codes, std::optional<DateWindow> window) {
  std::set<Date> dates;
  for (const auto& e : timeline.events) {
    if (window && !window->contains(e.date)) continue;
    if (in_set(codes, "thyroid_cancer", e)) dates.insert(e.date);
  }
  if (surgery_date && !dates.empty() && *dates.rbegin() > *surgery_date) {
    return {true, CancerBasis::PostSurgerySingleCode};
  }
  if (dates.size() >= 3) return {true, CancerBasis::ThreeCodes};
  return {};
}

CascadeOutcomes link_outcomes(const CohortRow& row, const PatientTimeline& timeline, bool had_itf,
                              const CodeTable& codes) {
  CascadeOutcomes o;
  o.patient_id = row.patient_id;
  o.had_itf = had_itf;
  o.ultrasound_date = link_ultrasound(timeline, row.index_date, codes);
  if (!o.ultrasound_date) return o;
  const auto f = link_downstream(timeline, o.ultrasound_date, codes);
  o.nodule_dx = f.nodule_dx;
  o.biopsy = f.biopsy;
  o.partial_thyroidectomy = f.partial_thyroidectomy;
  o.total_thyroidectomy = f.total_thyroidectomy;
  const auto c = confirm_cancer(timeline, f.first_surgery, codes,
                                DateWindow{*o.ultrasound_date, *o.ultrasound_date + kFollowUpDays});
  o.cancer_confirmed = c.confirmed;
  o.cancer_basis = c.basis;
  return o;
}

std::vector<CascadeOutcomes> link_cohort(std::span<const CohortRow> cohort, std::span<const PatientTimeline> timelines,
                                         const std::map<std::string, bool>& itf_by_report, const CodeTable& codes,
                                         unsigned threads) {
  std::map<std::string, const PatientTimeline*> by_id;
  for (const auto& t : timelines) by_id.emplace(t.patient_id, &t);
  std::vector<const CohortRow*> eligible;
  for (const auto& r : cohort) {
    if (r.eligibility != Eligibility::Eligible) continue;
    if (!by_id.count(r.patient_id)) throw ValidationError("no timeline for patient '" + r.patient_id + "'");
    eligible.push_back(&r);
  }
  std::vector<CascadeOutcomes> out(eligible.size());
  parallel_for(eligible.size(), threads, [&](std::size_t i) {
    const auto& row = *eligible[i];
    auto it = itf_by_report.find(row.index_report_id);
    const bool itf = it != itf_by_report.end() && it->second;
    out[i] = link_outcomes(row, *by_id.at(row.patient_id), itf, codes);
  });
  return out;
}

std::vector<std::string> outcomes_header() {
  return {"patient_id", "had_itf", "ultrasound_date", "nodule_dx", "biopsy", "partial_thyroidectomy",
          "total_thyroidectomy", "cancer_confirmed", "cancer_basis"};
}

void write_outcomes_csv(std::ostream& out, std::span<const CascadeOutcomes> rows) {
  out << csv_row(outcomes_header()) << '\n';
  for (const auto& o : rows) {
    out << csv_row({o.patient_id, flag(o.had_itf), o.ultrasound_date ? o.ultrasound_date->iso() : std::string(),
                    flag(o.nodule_dx), flag(o.biopsy), flag(o.partial_thyroidectomy), flag(o.total_thyroidectomy),
                    flag(o.cancer_confirmed), std::string(to_string(o.cancer_basis))})
        << '\n';
  }
}

std::vector<CascadeOutcomes> read_outcomes_csv(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  std::vector<CascadeOutcomes> out;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    const std::size_t line = i + 2;
    auto boolean = [&](std::string_view col) {
      const auto& v = t.at(i, col);
      if (v == "1") return true;
      if (v == "0") return false;
      throw ParseError(line, "column '" + std::string(col) + "' must be 0 or 1");
    };
    CascadeOutcomes o;
    o.patient_id = t.at(i, "patient_id");
    o.had_itf = boolean("had_itf");
    if (const auto& d = t.at(i, "ultrasound_date"); !d.empty()) {
      try {
        o.ultrasound_date = Date::parse(d);
      } catch (const std::invalid_argument& e) {
        throw ParseError(line, e.what());
      }
    }
    o.nodule_dx = boolean("nodule_dx");
    o.biopsy = boolean("biopsy");
    o.partial_thyroidectomy = boolean("partial_thyroidectomy");
    o.total_thyroidectomy = boolean("total_thyroidectomy");
    o.cancer_confirmed = boolean("cancer_confirmed");
    auto basis = enum_from_string<CancerBasis>(t.at(i, "cancer_basis"));
    if (!basis) throw ParseError(line, "unknown cancer_basis");
    o.cancer_basis = *basis;
    out.push_back(std::move(o));
  }
  return out;
}

}  // namespace itf
