#include "itf/stats/lasso.hpp"

#include <cmath>
#include <stdexcept>

namespace itf::stats {
namespace {

double sigmoid(double eta) { return eta >= 0 ? 1.0 / (1.0 + std::exp(-eta)) : std::exp(eta) / (1.0 + std::exp(eta)); }

double soft_threshold(double z, double g) {
  if (z > g) return z - g;
  if (z < -g) return z + g;
  return 0.0;
}

struct Problem {
  const Eigen::MatrixXd& z;  // standardized, no intercept
  const Eigen::VectorXd& y;
  double n;

  double loss(double b0, const Eigen::VectorXd& b) const {
    const Eigen::VectorXd eta = (z * b).array() + b0;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      const double e = eta[i];
      ll += y[i] * e - (e > 0 ? e + std::log1p(std::exp(-e)) : std::log1p(std::exp(e)));
    }
    return -ll / n;
  }
  double objective(double b0, const Eigen::VectorXd& b, double lambda) const {
    return loss(b0, b) + lambda * b.lpNorm<1>();
  }
};

/// Proximal Newton: quadratic model of the loss, solved by coordinate descent, then a
/// backtracking step on the penalized objective.
int solve(const Problem& pr, double lambda, double& b0, Eigen::VectorXd& b, const LassoOptions& opt) {
  const Eigen::Index n = pr.z.rows();
  const Eigen::Index p = pr.z.cols();
  int outer = 0;
  double f = pr.objective(b0, b, lambda);
  for (; outer < opt.max_outer; ++outer) {
    const Eigen::VectorXd eta = (pr.z * b).array() + b0;
    Eigen::VectorXd w(n), r(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double mu = sigmoid(eta[i]);
      w[i] = std::max(mu * (1.0 - mu), 1e-10);
      r[i] = (pr.y[i] - mu) / w[i];  // working residual at the current point
    }
    // Coordinate descent on (1/2n) sum w (r - d0 - z d)^2 + lambda |b + d|.
    double c0 = b0;
    Eigen::VectorXd c = b;
    Eigen::VectorXd res = r;  // residual of the quadratic model at (c0, c)
    const double wsum = w.sum();
    Eigen::VectorXd wz2(p);
    for (Eigen::Index j = 0; j < p; ++j) wz2[j] = (w.array() * pr.z.col(j).array().square()).sum();
    // One sweep over `all` or over the current nonzero set; returns the largest change.
    auto sweep = [&](bool all) {
      double max_delta = 0.0;
      const double d0 = (w.array() * res.array()).sum() / wsum;
      c0 += d0;
      res.array() -= d0;
      max_delta = std::max(max_delta, std::abs(d0));
      for (Eigen::Index j = 0; j < p; ++j) {
        if (!all && c[j] == 0.0) continue;
        const double g = (w.array() * pr.z.col(j).array() * res.array()).sum() / pr.n;
        const double curv = wz2[j] / pr.n;
        const double next = soft_threshold(curv * c[j] + g, lambda) / curv;
        const double delta = next - c[j];
        if (delta != 0.0) {
          res -= delta * pr.z.col(j);
          c[j] = next;
          max_delta = std::max(max_delta, std::abs(delta));
        }
      }
      return max_delta;
    };
    const double inner_tol = opt.tolerance * 0.1;
    for (int round = 0; round < opt.max_sweeps; ++round) {
      if (sweep(true) < inner_tol) break;
      for (int k = 0; k < opt.max_sweeps && sweep(false) >= inner_tol; ++k) {
      }
    }
    // Backtracking on the true objective.
    double t = 1.0;
    double nb0 = c0;
    Eigen::VectorXd nb = c;
    double fn = pr.objective(nb0, nb, lambda);
    for (int h = 0; h < 40 && fn > f + 1e-16 * std::abs(f); ++h) {
      t *= 0.5;
      nb0 = b0 + t * (c0 - b0);
      nb = b + t * (c - b);
      fn = pr.objective(nb0, nb, lambda);
    }
    const double change = std::max(std::abs(nb0 - b0), (nb - b).cwiseAbs().maxCoeff());
    b0 = nb0;
    b = nb;
    f = fn;
    if (change < opt.tolerance) {
      ++outer;
      break;
    }
  }
  return outer;
}

}  // namespace

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& x) const {
  Eigen::MatrixXd z = x;
  for (Eigen::Index j = 0; j < z.cols(); ++j) z.col(j) = (z.col(j).array() - mean[j]) / scale[j];
  return z;
}

Standardization standardize(const Eigen::MatrixXd& x) {
  Standardization s;
  s.mean.resize(x.cols());
  s.scale.resize(x.cols());
  const double n = static_cast<double>(x.rows());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    s.mean[j] = x.col(j).mean();
    s.scale[j] = std::sqrt((x.col(j).array() - s.mean[j]).square().sum() / n);
    if (!(s.scale[j] > 0.0)) throw std::invalid_argument("lasso: constant column cannot be standardized");
  }
  return s;
}

namespace {

Eigen::MatrixXd slopes(const DesignMatrix& x) {
  if (!x.intercept) throw std::invalid_argument("lasso: design must carry an intercept");
  return x.x.rightCols(x.x.cols() - 1);
}

}  // namespace

std::vector<double> default_lambda_grid(const DesignMatrix& x, const Eigen::VectorXd& y, std::size_t count,
                                        double ratio) {
  const Eigen::MatrixXd raw = slopes(x);
  const Eigen::MatrixXd z = standardize(raw).apply(raw);
  const double n = static_cast<double>(z.rows());
  const double ybar = y.mean();
  const double lmax = ((z.transpose() * (y.array() - ybar).matrix()).cwiseAbs() / n).maxCoeff();
  std::vector<double> grid;
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    grid.push_back(lmax * std::pow(ratio, f));
  }
  return grid;
}

LassoPath lasso_path(const DesignMatrix& x, const Eigen::VectorXd& y, std::span<const double> lambdas,
                     const LassoOptions& options) {
  if (lambdas.empty()) throw std::invalid_argument("lasso: empty lambda grid");
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (!(lambdas[i] >= 0.0)) throw std::invalid_argument("lasso: lambdas must be non-negative");
    if (i && !(lambdas[i] < lambdas[i - 1])) throw std::invalid_argument("lasso: lambda grid must be decreasing");
  }
  if (y.size() != x.x.rows()) throw std::invalid_argument("lasso: y length differs from design rows");
  const Eigen::MatrixXd raw = slopes(x);
  LassoPath path;
  path.names = x.names;
  path.standardization = standardize(raw);
  const Eigen::MatrixXd z = path.standardization.apply(raw);
  const double n = static_cast<double>(z.rows());
  const Problem pr{z, y, n};

  const double ybar = y.mean();
  if (ybar <= 0.0 || ybar >= 1.0) throw std::invalid_argument("lasso: y has a single class");
  double b0 = std::log(ybar / (1.0 - ybar));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(z.cols());
  const auto& s = path.standardization;
  for (double lambda : lambdas) {
    LassoPoint pt;
    pt.lambda = lambda;
    pt.iterations = solve(pr, lambda, b0, b, options);
    pt.beta_standardized.resize(b.size() + 1);
    pt.beta_standardized[0] = b0;
    pt.beta_standardized.tail(b.size()) = b;
    pt.beta.resize(b.size() + 1);
    const Eigen::VectorXd orig = b.cwiseQuotient(s.scale);
    pt.beta.tail(b.size()) = orig;
    pt.beta[0] = b0 - orig.dot(s.mean);
    pt.loglik = -n * pr.loss(b0, b);
    pt.k = 1 + static_cast<std::size_t>((b.array() != 0.0).count());
    pt.sbc = -2.0 * pt.loglik + static_cast<double>(pt.k) * std::log(n);
    path.points.push_back(std::move(pt));
  }
  for (std::size_t i = 1; i < path.points.size(); ++i) {
    if (path.points[i].sbc < path.points[path.selected].sbc) path.selected = i;
  }
  const auto& sel = path.points[path.selected];
  for (Eigen::Index j = 1; j < sel.beta.size(); ++j) {
    if (sel.beta[j] != 0.0) path.support.push_back(x.names[static_cast<std::size_t>(j)]);
  }
  return path;
}

double kkt_violation(const DesignMatrix& x, const Eigen::VectorXd& y, const Standardization& s,
                     const LassoPoint& point) {
  const Eigen::MatrixXd z = s.apply(slopes(x));
  const double n = static_cast<double>(z.rows());
  const Eigen::VectorXd b = point.beta_standardized.tail(z.cols());
  const Eigen::VectorXd eta = (z * b).array() + point.beta_standardized[0];
  Eigen::VectorXd r(z.rows());
  for (Eigen::Index i = 0; i < r.size(); ++i) r[i] = sigmoid(eta[i]) - y[i];
  double worst = std::abs(r.sum() / n);
  const Eigen::VectorXd g = z.transpose() * r / n;
  for (Eigen::Index j = 0; j < g.size(); ++j) {
    const double v = b[j] == 0.0 ? std::max(0.0, std::abs(g[j]) - point.lambda)
                                 : std::abs(g[j] + point.lambda * (b[j] > 0 ? 1.0 : -1.0));
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace itf::stats
