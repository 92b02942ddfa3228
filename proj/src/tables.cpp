#include "itf/tables.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>

#include "itf/csv.hpp"
#include "itf/errors.hpp"
#include "itf/stats/contingency.hpp"
#include "itf/stats/design.hpp"
#include "itf/stats/logistic.hpp"
#include "itf/utf8.hpp"

namespace itf {

std::string Table::csv() const {
  std::string out = csv_row(header) + "\n";
  for (const auto& r : rows) out += csv_row(r) + "\n";
  return out;
}

std::string Table::text() const {
  std::vector<std::size_t> width(header.size(), 0);
  auto measure = [&](const std::vector<std::string>& r) {
    for (std::size_t j = 0; j < r.size() && j < width.size(); ++j) width[j] = std::max(width[j], utf8_length(r[j]));
  };
  measure(header);
  for (const auto& r : rows) measure(r);
  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) s += "  ";
      s += r[j];
      if (j + 1 < r.size()) s.append(width[j] - utf8_length(r[j]), ' ');
    }
    return s + "\n";
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string or_text(double estimate, double low, double high, int decimals) {
  return format_fixed(estimate, decimals) + " (" + format_fixed(low, decimals) + ", " + format_fixed(high, decimals) +
         ")";
}

namespace {

std::string pct(std::int64_t part, std::int64_t whole) {
  if (whole <= 0) return "NA";
  return format_fixed(100.0 * static_cast<double>(part) / static_cast<double>(whole), 1) + "%";
}

std::string count_pct(std::int64_t part, std::int64_t whole) { return std::to_string(part) + " (" + pct(part, whole) + ")"; }

struct Factor {
  std::string label;
  std::vector<std::string> levels;
  std::string reference;
  std::function<std::optional<std::string>(const CohortRow&)> value;
};

std::optional<std::string> demographic(const CohortRow& r, const char* key) {
  auto it = r.demographics.find(key);
  if (it == r.demographics.end() || it->second.empty()) return std::nullopt;
  return it->second;
}

std::vector<Factor> table1_factors() {
  auto demo = [](const char* key) {
    return [key](const CohortRow& r) { return demographic(r, key); };
  };
  return {
      {"Sex", {"Female", "Male"}, "Male", [](const CohortRow& r) { return std::optional(std::string(to_string(r.sex))); }},
      {"Age group", {"18-54", "55-64", "65+"}, "18-54",
       [](const CohortRow& r) { return std::optional(age_band(r.age_years)); }},
      {"Race", {"Black", "Asian", "White", "Other"}, "White", demo("race")},
      {"Ethnicity", {"Hispanic", "Not Hispanic"}, "Not Hispanic", demo("ethnicity")},
      {"Primary language", {"Non-English", "English"}, "English", demo("language")},
      {"Marital status",
       {"Married/Life Partner", "Divorced/Separated", "Widowed", "Single"},
       "Married/Life Partner",
       demo("marital")},
      {"Education",
       {"No high school degree", "Highschool Degree/GED", "Some college/associate degree", "Bachelor's degree",
        "Post-Graduate Degree"},
       "Highschool Degree/GED",
       demo("education")},
      {"Employment", {"Disabled", "Employed", "Retired", "Unemployed"}, "Employed", demo("employment")},
      {"Payor", {"Private", "Medicare", "Medicaid", "Other Govt Programs", "Self-Pay"}, "Private", demo("payor")},
      {"Financial risk", {"Not hard", "Somewhat hard", "Hard/Very Hard"}, "Not hard", demo("financial_risk")},
      {"Imaging modality", {"CT", "MRI", "NuclearMedicine", "PET", "Ultrasound"}, "CT",
       [](const CohortRow& r) -> std::optional<std::string> {
         if (!r.modality) return std::nullopt;
         return std::string(to_string(*r.modality));
       }},
      {"Body location", {"Head", "Neck", "Chest", "Mixed"}, "Chest",
       [](const CohortRow& r) -> std::optional<std::string> {
         if (!r.body_group) return std::nullopt;
         return std::string(to_string(*r.body_group));
       }},
  };
}

struct MeanSd {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t n = 0;
};

MeanSd mean_sd(const std::vector<double>& v) {
  MeanSd m;
  m.n = v.size();
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

std::string mean_sd_text(const MeanSd& m) {
  if (m.n == 0) return "NA";
  return format_fixed(m.mean, 1) + " (" + format_fixed(m.sd, 2) + ")";
}

}  // namespace

std::string age_band(int age_years) {
  if (age_years < 55) return "18-54";
  if (age_years < 65) return "55-64";
  return "65+";
}

Table table1(std::span<const CohortRow> eligible, const std::map<std::string, bool>& itf_by_patient) {
  Table t;
  t.header = {"variable", "level", "no_itf", "itf", "total", "odds_ratio_95ci"};
  auto itf_of = [&](const CohortRow& r) {
    auto it = itf_by_patient.find(r.patient_id);
    return it != itf_by_patient.end() && it->second;
  };
  std::int64_t n_yes = 0;
  for (const auto& r : eligible) n_yes += itf_of(r);
  const std::int64_t n_no = static_cast<std::int64_t>(eligible.size()) - n_yes;
  t.rows.push_back({"N", "", std::to_string(n_no), std::to_string(n_yes), std::to_string(n_no + n_yes), ""});

  auto continuous = [&](const std::string& label, auto value, double increment) {
    std::vector<double> all, yes, no;
    stats::Frame frame;
    stats::Frame::Numeric xs;
    std::vector<double> ys;
    for (const auto& r : eligible) {
      const std::optional<double> v = value(r);
      xs.push_back(v);
      ys.push_back(itf_of(r) ? 1.0 : 0.0);
      if (!v) continue;
      all.push_back(*v);
      (itf_of(r) ? yes : no).push_back(*v);
    }
    std::string or_cell = "NA";
    try {
      frame.add_numeric("x", std::move(xs));
      const stats::Term terms[] = {stats::Term::continuous("x", increment)};
      const auto design = stats::build_design(frame, terms);
      const auto fit = stats::logistic_fit(design, stats::gather(ys, design.rows));
      const double b = fit.beta[1];
      const double se = fit.se[1];
      or_cell = or_text(std::exp(b), std::exp(b - stats::kZ95 * se), std::exp(b + stats::kZ95 * se), 2);
    } catch (const std::exception&) {
      // Degenerate input (one class, no variation): the OR stays NA.
    }
    t.rows.push_back({label, "Mean (SD)", mean_sd_text(mean_sd(no)), mean_sd_text(mean_sd(yes)),
                      mean_sd_text(mean_sd(all)), or_cell});
  };
  continuous("Age (years)", [](const CohortRow& r) { return std::optional<double>(r.age_years); }, 5.0);
  continuous("BMI", [](const CohortRow& r) { return r.bmi; }, 5.0);

  for (const auto& f : table1_factors()) {
    std::map<std::string, std::pair<std::int64_t, std::int64_t>> counts;  // level -> (no, yes)
    std::int64_t col_no = 0, col_yes = 0;
    for (const auto& r : eligible) {
      const auto v = f.value(r);
      if (!v) continue;
      if (std::find(f.levels.begin(), f.levels.end(), *v) == f.levels.end()) continue;
      if (itf_of(r)) {
        ++counts[*v].second;
        ++col_yes;
      } else {
        ++counts[*v].first;
        ++col_no;
      }
    }
    const auto ref = counts[f.reference];
    for (const auto& level : f.levels) {
      const auto c = counts[level];
      std::string or_cell;
      if (level == f.reference) {
        or_cell = "Ref";
      } else {
        try {
          const auto o = stats::odds_ratio({c.second, c.first, ref.second, ref.first});
          or_cell = or_text(o.estimate, o.ci_low, o.ci_high, 2);
        } catch (const stats::UndefinedOddsRatio&) {
          or_cell = "NA";
        }
      }
      t.rows.push_back({f.label, level, count_pct(c.first, col_no), count_pct(c.second, col_yes),
                        count_pct(c.first + c.second, col_no + col_yes), or_cell});
    }
  }
  return t;
}

Table table2(std::span<const FindingResult> itn) {
  Table t;
  t.header = {"feature", "subcategory", "n", "percent"};
  const auto total = static_cast<std::int64_t>(itn.size());
  t.rows.push_back({"ITN", "", std::to_string(total), ""});

  auto block = [&](const std::string& feature, auto get, const auto& names) {
    std::vector<std::int64_t> counts(names.size(), 0);
    std::int64_t present = 0;
    for (const auto& f : itn) {
      const auto v = get(f);
      if (!v) continue;
      ++present;
      ++counts[static_cast<std::size_t>(*v)];
    }
    t.rows.push_back({feature, "", std::to_string(present), pct(present, total)});
    for (std::size_t k = 0; k < names.size(); ++k) {
      t.rows.push_back({feature, std::string(names[k]), std::to_string(counts[k]), pct(counts[k], present)});
    }
  };
  block("Location", [](const FindingResult& f) { return f.location; }, EnumNames<NoduleLocation>::names);
  block("Recommendation", [](const FindingResult& f) { return f.recommendation; }, EnumNames<RecommendationKind>::names);

  {
    std::vector<double> sizes;
    std::vector<std::int64_t> bins(enum_count<SizeBin>(), 0);
    std::int64_t qualitative_only = 0;
    for (const auto& f : itn) {
      if (f.size) {
        sizes.push_back(f.size->cm());
        ++bins[static_cast<std::size_t>(bin_size(*f.size))];
      } else if (f.qualitative_size) {
        ++qualitative_only;
      }
    }
    const auto present = static_cast<std::int64_t>(sizes.size());
    const auto m = mean_sd(sizes);
    t.rows.push_back({"Size", "", std::to_string(present), pct(present, total)});
    t.rows.push_back({"Size", "Mean (SD)", m.n ? format_fixed(m.mean, 1) + " (" + format_fixed(m.sd, 1) + ")" : "NA", ""});
    for (std::size_t k = 0; k < bins.size(); ++k) {
      t.rows.push_back({"Size", std::string(to_string(static_cast<SizeBin>(k))), std::to_string(bins[k]),
                        pct(bins[k], present)});
    }
    t.rows.push_back({"Size", "Qualitative only", std::to_string(qualitative_only), pct(qualitative_only, total)});
  }
  block("Density", [](const FindingResult& f) { return f.density; }, EnumNames<Density>::names);
  block("Enhancement", [](const FindingResult& f) { return f.enhancement; }, EnumNames<Enhancement>::names);
  {
    std::int64_t calcified = 0;
    for (const auto& f : itn) calcified += f.calcified.value_or(false);
    t.rows.push_back({"Calcifications", "", std::to_string(calcified), pct(calcified, total)});
    t.rows.push_back({"Calcifications", "Calcified", std::to_string(calcified), pct(calcified, calcified)});
  }
  block("Attenuation", [](const FindingResult& f) { return f.attenuation; }, EnumNames<Attenuation>::names);
  block("Metabolic activity", [](const FindingResult& f) { return f.metabolic_activity; },
        EnumNames<MetabolicActivity>::names);
  block("Metabolic distribution", [](const FindingResult& f) { return f.metabolic_distribution; },
        EnumNames<MetabolicDistribution>::names);
  return t;
}

namespace {

struct OutcomeDef {
  const char* key;
  const char* label;
};
constexpr OutcomeDef kOutcomes[] = {
    {"ultrasound", "Thyroid ultrasound"},
    {"nodule", "Thyroid nodule"},
    {"biopsy", "Thyroid biopsy"},
    {"partial_thyroidectomy", "Partial thyroidectomy"},
    {"total_thyroidectomy", "Total thyroidectomy"},
    {"cancer", "Thyroid cancer"},
};

const std::vector<std::string>& counts_header() {
  static const std::vector<std::string> h = {"outcome", "itf_yes", "itf_no", "non_itf_yes", "non_itf_no"};
  return h;
}

}  // namespace

std::string outcome_label(const std::string& key) {
  for (const auto& o : kOutcomes) {
    if (key == o.key) return o.label;
  }
  return key;
}

std::vector<OutcomeCounts> outcome_counts(std::span<const CascadeOutcomes> outcomes) {
  std::vector<OutcomeCounts> out;
  for (const auto& def : kOutcomes) {
    OutcomeCounts c;
    c.outcome = def.key;
    const std::string key = def.key;
    for (const auto& o : outcomes) {
      bool event = false;
      if (key == "ultrasound") event = o.ultrasound_date.has_value();
      else if (key == "nodule") event = o.nodule_dx;
      else if (key == "biopsy") event = o.biopsy;
      else if (key == "partial_thyroidectomy") event = o.partial_thyroidectomy;
      else if (key == "total_thyroidectomy") event = o.total_thyroidectomy;
      else event = o.cancer_confirmed;
      auto& cell = o.had_itf ? (event ? c.itf_yes : c.itf_no) : (event ? c.non_itf_yes : c.non_itf_no);
      ++cell;
    }
    out.push_back(c);
  }
  return out;
}

std::string counts_csv(std::span<const OutcomeCounts> counts) {
  std::string out = csv_row(counts_header()) + "\n";
  for (const auto& c : counts) {
    out += csv_row({c.outcome, std::to_string(c.itf_yes), std::to_string(c.itf_no), std::to_string(c.non_itf_yes),
                    std::to_string(c.non_itf_no)}) +
           "\n";
  }
  return out;
}

std::vector<OutcomeCounts> read_counts_csv(const std::filesystem::path& path) {
  const auto t = CsvTable::read(path);
  std::vector<OutcomeCounts> out;
  for (std::size_t i = 0; i < t.rows(); ++i) {
    auto num = [&](const char* col) -> std::int64_t {
      const std::string& s = t.at(i, col);
      std::size_t used = 0;
      long long v = 0;
      try {
        v = std::stoll(s, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != s.size()) throw ParseError(i + 2, std::string("column ") + col + ": not an integer");
      if (v < 0) throw ValidationError("line " + std::to_string(i + 2) + ": negative count in " + col);
      return v;
    };
    OutcomeCounts c;
    c.outcome = t.at(i, "outcome");
    c.itf_yes = num("itf_yes");
    c.itf_no = num("itf_no");
    c.non_itf_yes = num("non_itf_yes");
    c.non_itf_no = num("non_itf_no");
    out.push_back(c);
  }
  return out;
}

Table table3(std::span<const OutcomeCounts> counts) {
  Table t;
  t.header = {"outcome", "non_itf_no", "non_itf_yes", "itf_no", "itf_yes", "odds_ratio", "ci_low", "ci_high",
              "odds_ratio_95ci"};
  for (const auto& c : counts) {
    const std::int64_t non_n = c.non_itf_yes + c.non_itf_no;
    const std::int64_t itf_n = c.itf_yes + c.itf_no;
    std::vector<std::string> row = {outcome_label(c.outcome), count_pct(c.non_itf_no, non_n),
                                    count_pct(c.non_itf_yes, non_n), count_pct(c.itf_no, itf_n),
                                    count_pct(c.itf_yes, itf_n)};
    try {
      const auto o = stats::odds_ratio({c.itf_yes, c.itf_no, c.non_itf_yes, c.non_itf_no});
      row.insert(row.end(), {format_fixed(o.estimate, 1), format_fixed(o.ci_low, 1), format_fixed(o.ci_high, 1),
                             or_text(o.estimate, o.ci_low, o.ci_high, 1)});
    } catch (const stats::UndefinedOddsRatio&) {
      row.insert(row.end(), {"NA", "NA", "NA", "NA"});
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace itf
