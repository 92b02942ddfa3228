#include "itf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "itf/csv.hpp"
#include "itf/stats/contingency.hpp"
#include "json.hpp"

namespace itf {

namespace {

const std::vector<std::string> kModalities = {"CT", "MRI", "NuclearMedicine", "PET", "Ultrasound"};
const std::vector<std::string> kBodyGroups = {"Head", "Neck", "Chest", "Mixed"};

std::vector<stats::Term> candidate_terms() {
  using stats::Term;
  return {
      Term::categorical("sex", {"Female", "Male"}, "Male"),
      Term::continuous("age", 5.0, "age_per_5y"),
      Term::continuous("bmi", 5.0, "bmi_per_5"),
      Term::categorical("race", {"Black", "Asian", "White", "Other"}, "White"),
      Term::categorical("ethnicity", {"Hispanic", "Not Hispanic"}, "Not Hispanic"),
      Term::categorical("language", {"Non-English", "English"}, "English"),
      Term::categorical("marital", {"Married/Life Partner", "Divorced/Separated", "Widowed", "Single"},
                        "Married/Life Partner"),
      Term::categorical("payor", {"Private", "Medicare", "Medicaid", "Other Govt Programs", "Self-Pay"}, "Private"),
      Term::continuous("charlson", 1.0, "charlson_weighted"),
      Term::categorical("modality", kModalities, "CT"),
      Term::categorical("body_group", kBodyGroups, "Chest"),
  };
}

std::string variable_of(const std::string& column) {
  if (auto eq = column.find('='); eq != std::string::npos) return column.substr(0, eq);
  if (column == "age_per_5y") return "age";
  if (column == "bmi_per_5") return "bmi";
  if (column == "charlson_weighted") return "charlson";
  return column;
}

bool is_interaction(const std::string& column) { return column.find(':') != std::string::npos; }

stats::Frame cohort_frame(std::span<const CohortRow> rows) {
  stats::Frame f;
  stats::Frame::Categorical sex, race, ethnicity, language, marital, payor, modality, body;
  stats::Frame::Numeric age, bmi, charlson;
  auto demo = [](const CohortRow& r, const char* key) -> std::optional<std::string> {
    auto it = r.demographics.find(key);
    if (it == r.demographics.end() || it->second.empty()) return std::nullopt;
    return it->second;
  };
  for (const auto& r : rows) {
    sex.emplace_back(std::string(to_string(r.sex)));
    age.emplace_back(static_cast<double>(r.age_years));
    bmi.push_back(r.bmi);
    race.push_back(demo(r, "race"));
    ethnicity.push_back(demo(r, "ethnicity"));
    language.push_back(demo(r, "language"));
    marital.push_back(demo(r, "marital"));
    payor.push_back(demo(r, "payor"));
    charlson.emplace_back(static_cast<double>(r.charlson.weighted));
    modality.push_back(r.modality ? std::optional(std::string(to_string(*r.modality))) : std::nullopt);
    body.push_back(r.body_group ? std::optional(std::string(to_string(*r.body_group))) : std::nullopt);
  }
  f.add_categorical("sex", std::move(sex));
  f.add_numeric("age", std::move(age));
  f.add_numeric("bmi", std::move(bmi));
  f.add_categorical("race", std::move(race));
  f.add_categorical("ethnicity", std::move(ethnicity));
  f.add_categorical("language", std::move(language));
  f.add_categorical("marital", std::move(marital));
  f.add_categorical("payor", std::move(payor));
  f.add_numeric("charlson", std::move(charlson));
  f.add_categorical("modality", std::move(modality));
  f.add_categorical("body_group", std::move(body));
  return f;
}

std::vector<std::string> without(std::vector<std::string> v, const std::vector<std::string>& drop) {
  std::erase_if(v, [&](const std::string& s) { return std::find(drop.begin(), drop.end(), s) != drop.end(); });
  return v;
}

double wald_p(double beta, double se) { return se > 0.0 ? std::erfc(std::fabs(beta / se) / std::sqrt(2.0)) : 1.0; }

}  // namespace

AnalysisResult analyze_cohort(std::span<const CohortRow> eligible, const std::map<std::string, bool>& itf_by_patient,
                              const AnalysisOptions& options) {
  AnalysisResult r;
  r.eligible = eligible.size();
  const auto frame = cohort_frame(eligible);
  auto terms = candidate_terms();
  terms.push_back(stats::Term::interaction("modality", "body_group"));
  const auto full = stats::build_design(frame, terms);
  r.complete_cases = full.n();
  r.empty_columns = full.dropped;

  std::vector<double> outcome;
  outcome.reserve(eligible.size());
  for (const auto& row : eligible) {
    auto it = itf_by_patient.find(row.patient_id);
    outcome.push_back(it != itf_by_patient.end() && it->second ? 1.0 : 0.0);
  }
  const Eigen::VectorXd y = stats::gather(outcome, full.rows);

  for (std::size_t j = full.intercept ? 1 : 0; j < full.names.size(); ++j) {
    if (!is_interaction(full.names[j])) r.candidate_columns.push_back(full.names[j]);
  }
  const auto screen_design = full.select(r.candidate_columns);
  const auto screen_aliased = stats::aliased_columns(screen_design);
  const auto screen = full.select(without(r.candidate_columns, screen_aliased));
  const auto grid = stats::default_lambda_grid(screen, y, options.lambda_count, options.lambda_ratio);
  r.path = stats::lasso_path(screen, y, grid, options.lasso);

  std::set<std::string> chosen;
  for (const auto& c : r.path.support) chosen.insert(variable_of(c));
  for (const auto& t : candidate_terms()) {
    if (chosen.count(t.var)) r.selected_variables.push_back(t.var);
    if (chosen.count(t.var) || t.var == "modality" || t.var == "body_group") r.model_variables.push_back(t.var);
  }
  auto in_model = [&](const std::string& column) {
    return std::find(r.model_variables.begin(), r.model_variables.end(), variable_of(column)) !=
           r.model_variables.end();
  };
  std::vector<std::string> main_cols, full_cols;
  for (const auto& c : r.candidate_columns) {
    if (in_model(c)) main_cols.push_back(c);
  }
  full_cols = main_cols;
  for (std::size_t j = full.intercept ? 1 : 0; j < full.names.size(); ++j) {
    if (is_interaction(full.names[j])) full_cols.push_back(full.names[j]);
  }
  r.aliased = stats::aliased_columns(full.select(full_cols));
  main_cols = without(main_cols, r.aliased);
  full_cols = without(full_cols, r.aliased);

  const auto main_x = full.select(main_cols);
  const auto full_x = full.select(full_cols);
  r.main_fit = stats::logistic_fit(main_x, y, options.fit);
  r.full_fit = stats::logistic_fit(full_x, y, options.fit);
  r.interaction_lrt = stats::lr_test(r.main_fit, r.full_fit);

  std::vector<double> p(r.full_fit.fitted.data(), r.full_fit.fitted.data() + r.full_fit.fitted.size());
  std::vector<double> yv(y.data(), y.data() + y.size());
  r.hl = stats::hosmer_lemeshow(p, yv, options.hl_groups);
  r.auc = stats::auc(p, yv);

  r.cooks_threshold = options.cooks_threshold;
  const auto flagged = stats::cooks_screen(r.full_fit, full_x, y, options.cooks_threshold);
  for (std::size_t i : flagged) r.cooks_flagged.push_back(eligible[full_x.rows[i]].patient_id);
  if (!flagged.empty()) {
    try {
      r.cooks_changes = stats::deletion_changes(r.full_fit, full_x, y, flagged, options.fit);
    } catch (const std::exception& e) {
      r.cooks_refit_error = e.what();
    }
  }

  r.contrasts = stats::interaction_contrasts(r.full_fit, "modality", kModalities, "CT", "body_group", kBodyGroups,
                                             "Chest");
  return r;
}

Table model_table(const AnalysisResult& r) {
  Table t;
  t.header = {"section",  "term",   "modality", "body_group",          "estimate",        "se", "p_value",
              "odds_ratio", "ci_low", "ci_high",  "ratio_of_odds_ratios", "odds_ratio_95ci", "note"};
  const auto& f = r.full_fit;
  for (std::size_t j = 0; j < f.names.size(); ++j) {
    const double b = f.beta[static_cast<Eigen::Index>(j)];
    const double se = f.se[static_cast<Eigen::Index>(j)];
    const double lo = std::exp(b - stats::kZ95 * se);
    const double hi = std::exp(b + stats::kZ95 * se);
    t.rows.push_back({"coefficient", f.names[j], "", "", format_number(b), format_number(se), format_number(wald_p(b, se)),
                      format_number(std::exp(b)), format_number(lo), format_number(hi), "",
                      or_text(std::exp(b), lo, hi, 2), ""});
  }
  for (const auto& name : r.aliased) {
    t.rows.push_back({"coefficient", name, "", "", "NA", "NA", "NA", "NA", "NA", "NA", "", "NA", "aliased"});
  }
  for (const auto& name : r.empty_columns) {
    t.rows.push_back({"coefficient", name, "", "", "NA", "NA", "NA", "NA", "NA", "NA", "", "NA", "no observations"});
  }
  for (const auto& c : r.contrasts) {
    const std::string term = "modality=" + c.level1 + ":body_group=" + c.level2;
    if (c.empty) {
      t.rows.push_back({"cell", term, c.level1, c.level2, "NA", "NA", "NA", "NA", "NA", "NA", "NA", "NA", "empty"});
      continue;
    }
    const bool reference = c.level1 == "CT" && c.level2 == "Chest";
    t.rows.push_back({"cell", term, c.level1, c.level2, format_number(c.log_or), format_number(c.se),
                      reference ? "" : format_number(wald_p(c.log_or, c.se)), format_number(*c.odds_ratio),
                      format_number(*c.ci_low), format_number(*c.ci_high),
                      c.ratio_of_odds_ratios ? format_number(*c.ratio_of_odds_ratios) : "",
                      reference ? "Ref" : or_text(*c.odds_ratio, *c.ci_low, *c.ci_high, 2), reference ? "reference" : ""});
  }
  return t;
}

Table forest_table(const AnalysisResult& r) {
  Table t;
  t.header = {"label", "odds_ratio", "ci_low", "ci_high", "log_or", "log_ci_low", "log_ci_high"};
  auto push = [&](const std::string& label, double b, double se) {
    const double lo = b - stats::kZ95 * se;
    const double hi = b + stats::kZ95 * se;
    t.rows.push_back({label, format_number(std::exp(b)), format_number(std::exp(lo)), format_number(std::exp(hi)),
                      format_number(b), format_number(lo), format_number(hi)});
  };
  const auto& f = r.full_fit;
  for (std::size_t j = 1; j < f.names.size(); ++j) {
    const auto var = variable_of(f.names[j]);
    if (var == "modality" || var == "body_group") continue;
    push(f.names[j], f.beta[static_cast<Eigen::Index>(j)], f.se[static_cast<Eigen::Index>(j)]);
  }
  for (const auto& c : r.contrasts) {
    if (c.empty || (c.level1 == "CT" && c.level2 == "Chest")) continue;
    push(c.level1 + " " + c.level2, c.log_or, c.se);
  }
  return t;
}

Table lasso_table(const AnalysisResult& r) {
  Table t;
  t.header = {"index", "lambda", "k", "loglik", "sbc", "selected"};
  for (std::size_t i = 0; i < r.path.points.size(); ++i) {
    const auto& pt = r.path.points[i];
    t.rows.push_back({std::to_string(i), format_number(pt.lambda), std::to_string(pt.k), format_number(pt.loglik),
                      format_number(pt.sbc), i == r.path.selected ? "1" : "0"});
  }
  return t;
}

std::string diagnostics_json(const AnalysisResult& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["eligible"] = r.eligible;
  j["complete_cases"] = r.complete_cases;
  ordered_json lasso;
  lasso["candidates"] = r.candidate_columns;
  lasso["selected_index"] = r.path.selected;
  if (!r.path.points.empty()) {
    lasso["selected_lambda"] = r.path.points[r.path.selected].lambda;
    lasso["selected_sbc"] = r.path.points[r.path.selected].sbc;
  }
  lasso["support"] = r.path.support;
  lasso["selected_variables"] = r.selected_variables;
  j["lasso"] = lasso;
  j["model_variables"] = r.model_variables;
  j["aliased_columns"] = r.aliased;
  j["empty_columns"] = r.empty_columns;
  ordered_json fit;
  fit["n"] = r.full_fit.n;
  fit["k"] = r.full_fit.k;
  fit["loglik"] = r.full_fit.loglik;
  fit["deviance"] = r.full_fit.deviance;
  fit["iterations"] = r.full_fit.iterations;
  fit["converged"] = r.full_fit.converged;
  j["model"] = fit;
  ordered_json lrt;
  lrt["test"] = "modality x body_group interaction";
  lrt["chi2"] = r.interaction_lrt.chi2;
  lrt["df"] = r.interaction_lrt.df;
  lrt["p"] = r.interaction_lrt.p;
  j["interaction_lrt"] = lrt;
  ordered_json hl;
  hl["statistic"] = r.hl.statistic;
  hl["df"] = r.hl.df;
  hl["p"] = r.hl.p;
  ordered_json groups = ordered_json::array();
  for (const auto& g : r.hl.groups) {
    groups.push_back({{"size", g.size}, {"observed", g.observed}, {"expected", g.expected}});
  }
  hl["groups"] = groups;
  hl["notes"] = r.hl.notes;
  j["hosmer_lemeshow"] = hl;
  j["auc"] = r.auc;
  ordered_json cooks;
  cooks["threshold"] = r.cooks_threshold;
  cooks["flagged"] = r.cooks_flagged;
  double max_change = 0.0;
  for (const auto& c : r.cooks_changes) max_change = std::max(max_change, c.percent);
  if (!r.cooks_changes.empty()) cooks["max_coefficient_change_percent"] = max_change;
  if (r.cooks_refit_error) cooks["refit_error"] = *r.cooks_refit_error;
  j["cooks"] = cooks;
  return j.dump(2) + "\n";
}

}  // namespace itf
