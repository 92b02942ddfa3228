#include "itf/stats/logistic.hpp"

#include <algorithm>
#include <cmath>

namespace itf::stats {
namespace {

Eigen::VectorXd ones_if_empty(const Eigen::VectorXd& w, Eigen::Index n) {
  return w.size() == 0 ? Eigen::VectorXd::Ones(n) : w;
}

double sigmoid(double eta) { return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta)); }

/// log(1 + exp(eta)) without overflow.
double softplus(double eta) { return eta > 0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta)); }

}  // namespace

std::size_t ModelFit::index(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("model has no coefficient " + std::string(name));
  return static_cast<std::size_t>(it - names.begin());
}

double logistic_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                       const Eigen::VectorXd& weights) {
  const Eigen::VectorXd w = ones_if_empty(weights, x.rows());
  const Eigen::VectorXd eta = x * beta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i) ll += w[i] * (y[i] * eta[i] - softplus(eta[i]));
  return ll;
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                               const Eigen::VectorXd& weights) {
  const Eigen::VectorXd w = ones_if_empty(weights, x.rows());
  const Eigen::VectorXd eta = x * beta;
  Eigen::VectorXd r(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) r[i] = w[i] * (y[i] - sigmoid(eta[i]));
  return x.transpose() * r;
}

ModelFit logistic_fit(const DesignMatrix& design, const Eigen::VectorXd& y, const FitOptions& options,
                      const Eigen::VectorXd& weights) {
  const Eigen::MatrixXd& x = design.x;
  const Eigen::Index n = x.rows();
  const Eigen::Index k = x.cols();
  if (y.size() != n) throw std::invalid_argument("logistic_fit: y length differs from design rows");
  if (weights.size() != 0 && weights.size() != n) throw std::invalid_argument("logistic_fit: weight length mismatch");
  const Eigen::VectorXd w = ones_if_empty(weights, n);
  double total = 0.0;
  double events = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y[i] != 0.0 && y[i] != 1.0) throw std::invalid_argument("logistic_fit: y must be 0 or 1");
    if (!(w[i] >= 0.0)) throw std::invalid_argument("logistic_fit: negative weight");
    total += w[i];
    events += w[i] * y[i];
  }
  if (events <= 0.0 || events >= total) throw std::invalid_argument("logistic_fit: y has a single class");
  if (!(total > static_cast<double>(k))) throw std::invalid_argument("logistic_fit: needs n > k");

  // Rank check on the weighted cross-product, scaled to unit diagonal.
  {
    const Eigen::MatrixXd xtx = x.transpose() * w.asDiagonal() * x;
    const Eigen::VectorXd d = xtx.diagonal().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
    const Eigen::MatrixXd scaled = d.asDiagonal() * xtx * d.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(scaled, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff();
    const double hi = es.eigenvalues().maxCoeff();
    if (!(lo > 1e-10 * hi)) throw RankError("logistic_fit: design is rank deficient");
  }

  ModelFit fit;
  fit.names = design.names;
  fit.n = total;
  fit.k = static_cast<std::size_t>(k);
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(k);
  if (design.intercept && k > 0) beta[0] = std::log(events / (total - events));
  double ll = logistic_loglik(x, y, beta, w);

  Eigen::VectorXd p(n);
  Eigen::MatrixXd info(k, k);
  auto refresh = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = x * b;
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      p[i] = sigmoid(eta[i]);
      v[i] = w[i] * p[i] * (1.0 - p[i]);
    }
    info = x.transpose() * v.asDiagonal() * x;
  };

  const Eigen::Index start = design.intercept ? 1 : 0;
  auto beyond_bound = [&] {
    return k > start && beta.tail(k - start).cwiseAbs().maxCoeff() > options.separation_bound;
  };

  for (int it = 1; it <= options.max_iterations; ++it) {
    refresh(beta);
    const Eigen::VectorXd score = x.transpose() * (w.array() * (y - p).array()).matrix();
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) throw RankError("logistic_fit: singular information matrix");
    const Eigen::VectorXd step = ldlt.solve(score);
    double t = 1.0;
    Eigen::VectorXd next = beta + step;
    double ll_next = logistic_loglik(x, y, next, w);
    for (int h = 0; h < 30 && !(ll_next >= ll - 1e-12 * std::abs(ll)); ++h) {
      t *= 0.5;
      next = beta + t * step;
      ll_next = logistic_loglik(x, y, next, w);
    }
    const double change = std::abs(ll_next - ll) / (std::abs(ll_next) + 0.1);
    const bool rising = ll_next > ll;
    beta = next;
    ll = ll_next;
    fit.iterations = it;
    // Separation: a coefficient past the bound while the likelihood creeps upward. Early
    // Newton steps may overshoot the bound with large likelihood gains; those do not count.
    if (beyond_bound() && rising && change < 1e-6) {
      throw SeparationError("logistic_fit: complete or quasi-complete separation");
    }
    if (change < options.tolerance) {
      const Eigen::VectorXd s = logistic_score(x, y, beta, w);
      if (s.cwiseAbs().maxCoeff() < 1e-8 || change == 0.0) {
        fit.converged = true;
        break;
      }
    }
  }

  if (!fit.converged && beyond_bound()) {
    throw SeparationError("logistic_fit: complete or quasi-complete separation");
  }
  refresh(beta);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  if (ldlt.info() != Eigen::Success) throw RankError("logistic_fit: singular information matrix");
  fit.covariance = ldlt.solve(Eigen::MatrixXd::Identity(k, k));
  fit.se = fit.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.beta = beta;
  fit.loglik = ll;
  fit.deviance = -2.0 * ll;
  fit.fitted = p;
  return fit;
}

}  // namespace itf::stats
