#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itf/cohort.hpp"
#include "itf/stats/design.hpp"
#include "itf/stats/diagnostics.hpp"
#include "itf/stats/lasso.hpp"
#include "itf/stats/logistic.hpp"
#include "itf/tables.hpp"

namespace itf {

struct AnalysisOptions {
  std::size_t lambda_count = 60;
  double lambda_ratio = 1e-4;
  int hl_groups = 10;
  double cooks_threshold = 0.5;
  stats::FitOptions fit;
  stats::LassoOptions lasso;
};

using stats::CoefficientChange;

struct AnalysisResult {
  std::size_t eligible = 0;
  std::size_t complete_cases = 0;
  std::vector<std::string> candidate_columns;
  stats::LassoPath path;
  std::vector<std::string> selected_variables;  // LASSO support mapped back to variables
  std::vector<std::string> model_variables;     // selected plus modality and body group
  std::vector<std::string> aliased;             // columns dropped as linear combinations
  std::vector<std::string> empty_columns;       // dummy columns without observations
  stats::ModelFit main_fit;
  stats::ModelFit full_fit;  // main effects plus modality x body group
  stats::LrTest interaction_lrt;
  stats::HosmerLemeshow hl;
  double auc = 0.0;
  double cooks_threshold = 0.5;
  std::vector<std::string> cooks_flagged;  // patient ids
  std::vector<CoefficientChange> cooks_changes;
  std::optional<std::string> cooks_refit_error;
  std::vector<stats::CellContrast> contrasts;
};

/// Candidate variables: sex, age per 5 years, BMI per 5 units, race, ethnicity, primary
/// language, marital status, payor, Charlson weighted score, modality, body group.
/// Rows missing any candidate are dropped once, so every fit and the LRT share one sample.
/// LASSO (SBC) screens the main effects; the final model refits the selected variables with
/// modality, body group and their interaction. Throws std::invalid_argument when the data
/// cannot support the fits.
AnalysisResult analyze_cohort(std::span<const CohortRow> eligible, const std::map<std::string, bool>& itf_by_patient,
                              const AnalysisOptions& options = {});

/// Coefficient rows followed by one row per modality x body-group cell (OR vs CT chest).
Table model_table(const AnalysisResult& r);
/// Point estimate and 95% CI per reported effect, with natural-log columns for plotting.
Table forest_table(const AnalysisResult& r);
Table lasso_table(const AnalysisResult& r);
std::string diagnostics_json(const AnalysisResult& r);

}  // namespace itf
