#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "itf/stats/design.hpp"

namespace itf::stats {

class SeparationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitOptions {
  double tolerance = 1e-10;  // relative log-likelihood change
  int max_iterations = 50;
  double separation_bound = 15.0;  // |coefficient| beyond which a still-rising likelihood means separation
};

struct ModelFit {
  std::vector<std::string> names;
  Eigen::VectorXd beta;
  Eigen::VectorXd se;
  Eigen::MatrixXd covariance;
  double loglik = 0.0;
  double deviance = 0.0;  // -2 loglik; binary data have a zero saturated log-likelihood
  double n = 0.0;         // total weight
  std::size_t k = 0;      // parameters
  Eigen::VectorXd fitted;
  int iterations = 0;
  bool converged = false;

  /// Throws std::out_of_range.
  std::size_t index(std::string_view name) const;
};

/// Maximum-likelihood logistic regression by IRLS with step halving.
///
/// `weights` are frequency weights (all ones when empty). Converges when the relative
/// log-likelihood change falls below the tolerance and the score max-norm is below 1e-8.
/// Throws std::invalid_argument (shape, y outside {0,1}, single outcome class, n <= k),
/// RankError (rank-deficient design) and SeparationError.
ModelFit logistic_fit(const DesignMatrix& x, const Eigen::VectorXd& y, const FitOptions& options = {},
                      const Eigen::VectorXd& weights = {});

/// Log-likelihood and score of `beta` (frequency weights optional).
double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                       const Eigen::VectorXd& weights = {});
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                               const Eigen::VectorXd& weights = {});

}  // namespace itf::stats
