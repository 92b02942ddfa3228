#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "itf/stats/design.hpp"
#include "itf/stats/logistic.hpp"

namespace itf::stats {

/// Upper tail of the chi-square distribution; 1 for x <= 0.
double chi_square_sf(double x, double df);

struct HlGroup {
  std::size_t size = 0;
  double observed = 0.0;
  double expected = 0.0;
};

struct HosmerLemeshow {
  double statistic = 0.0;
  int df = 0;
  double p = 1.0;
  std::vector<HlGroup> groups;
  std::vector<std::string> notes;  // merges applied
};

/// Groups of near-equal size by ascending fitted risk (stable on ties); statistic
/// sum (O-E)^2 / (E (1 - E/n_g)) over groups, p from chi-square with groups-2 df.
/// A group whose expected events or non-events fall below 1 is merged into its
/// neighbour (the next group, or the previous one for the last) and the merge is noted.
/// p is NaN when fewer than three groups remain (df < 1).
/// Throws std::invalid_argument when n < g, g < 2, lengths differ or p is outside (0,1).
HosmerLemeshow hosmer_lemeshow(std::span<const double> p, std::span<const double> y, int g = 10);

/// Mann-Whitney concordance with half credit for ties. Throws std::invalid_argument
/// unless both classes are present.
double auc(std::span<const double> score, std::span<const double> y);

/// One-step Cook's distance D_i = r_i^2 h_i / (k (1 - h_i)^2), with Pearson residual r_i
/// and leverage h_i from the weighted hat matrix of the converged fit.
std::vector<double> cooks_distance(const ModelFit& fit, const DesignMatrix& x, const Eigen::VectorXd& y);
std::vector<std::size_t> cooks_screen(const ModelFit& fit, const DesignMatrix& x, const Eigen::VectorXd& y,
                                      double threshold = 0.5);

struct CoefficientChange {
  std::string name;
  double before = 0.0;
  double after = 0.0;
  double percent = 0.0;  // |after - before| / |before| * 100; 0 when before is 0
};

/// Refits without the design rows in `drop` and reports the change of every non-intercept
/// coefficient. Propagates the refit's exceptions.
std::vector<CoefficientChange> deletion_changes(const ModelFit& fit, const DesignMatrix& x, const Eigen::VectorXd& y,
                                                std::span<const std::size_t> drop, const FitOptions& options = {});

struct LrTest {
  double chi2 = 0.0;
  int df = 0;
  double p = 1.0;
};

/// Deviance difference between nested fits. Throws std::invalid_argument unless every
/// nested coefficient name appears in the full model and both were fit on the same n.
LrTest lr_test(const ModelFit& nested, const ModelFit& full);

/// Odds ratio of one factor-pair cell against the reference cell.
struct CellContrast {
  std::string level1;
  std::string level2;
  std::optional<double> odds_ratio;  // nullopt for cells without observations
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> ratio_of_odds_ratios;  // exp(interaction coefficient)
  double log_or = 0.0;
  double se = 0.0;
  bool empty = false;
};

/// ln OR(cell) = b_level1 + b_level2 + b_level1:level2 (reference terms zero), with a
/// delta-method interval from the fit covariance. Cells whose dummy was dropped from the
/// design, or whose interaction column is absent, come back empty.
std::vector<CellContrast> interaction_contrasts(const ModelFit& fit, const std::string& var1,
                                                std::span<const std::string> levels1, const std::string& ref1,
                                                const std::string& var2, std::span<const std::string> levels2,
                                                const std::string& ref2, double z = 1.96);

}  // namespace itf::stats
