#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "itf/stats/design.hpp"
#include "itf/stats/logistic.hpp"

namespace itf::stats {

/// Column centering and scaling used internally by the path (population SD).
struct Standardization {
  Eigen::VectorXd mean;   // per non-intercept column
  Eigen::VectorXd scale;
  /// Standardized copy of the non-intercept columns.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& x_without_intercept) const;
};

/// Throws std::invalid_argument when a column is constant.
Standardization standardize(const Eigen::MatrixXd& x_without_intercept);

struct LassoOptions {
  double tolerance = 1e-10;  // max coefficient change between proximal Newton steps
  int max_outer = 200;
  int max_sweeps = 10000;    // coordinate-descent sweeps per outer step
};

struct LassoPoint {
  double lambda = 0.0;
  Eigen::VectorXd beta;               // original scale, intercept first
  Eigen::VectorXd beta_standardized;  // intercept first
  double loglik = 0.0;
  std::size_t k = 0;  // nonzero coefficients including the intercept
  double sbc = 0.0;   // -2 loglik + k ln(n)
  int iterations = 0;
};

struct LassoPath {
  std::vector<std::string> names;
  Standardization standardization;
  std::vector<LassoPoint> points;
  std::size_t selected = 0;  // argmin sbc; first on ties
  std::vector<std::string> support;  // nonzero non-intercept columns at the selected point
};

/// Penalized logistic path minimizing -loglik/n + lambda * sum |beta_j| over standardized
/// non-intercept columns; the intercept is unpenalized. Warm-started along the grid.
///
/// Throws std::invalid_argument for an empty or non-decreasing grid, a design without
/// intercept, or a constant column.
LassoPath lasso_path(const DesignMatrix& x, const Eigen::VectorXd& y, std::span<const double> lambdas,
                     const LassoOptions& options = {});

/// Log-spaced grid from the smallest lambda that zeroes every slope down to ratio times it.
std::vector<double> default_lambda_grid(const DesignMatrix& x, const Eigen::VectorXd& y, std::size_t count = 60,
                                        double ratio = 1e-4);

/// Largest KKT violation of `point` for its lambda on the standardized problem.
double kkt_violation(const DesignMatrix& x, const Eigen::VectorXd& y, const Standardization& s,
                     const LassoPoint& point);

}  // namespace itf::stats
