#include "itf/stats/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>

namespace itf::stats {

double chi_square_sf(double x, double df) {
  if (!(df > 0.0)) throw std::invalid_argument("chi_square_sf: df must be positive");
  if (!(x > 0.0)) return 1.0;
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(df), x));
}

HosmerLemeshow hosmer_lemeshow(std::span<const double> p, std::span<const double> y, int g) {
  if (p.size() != y.size()) throw std::invalid_argument("hosmer_lemeshow: length mismatch");
  if (g < 2) throw std::invalid_argument("hosmer_lemeshow: needs at least 2 groups");
  const std::size_t n = p.size();
  if (n < static_cast<std::size_t>(g)) throw std::invalid_argument("hosmer_lemeshow: fewer observations than groups");
  for (double v : p) {
    if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("hosmer_lemeshow: probabilities must lie in (0,1)");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });

  HosmerLemeshow out;
  const auto gs = static_cast<std::size_t>(g);
  for (std::size_t k = 0; k < gs; ++k) {
    HlGroup grp;
    for (std::size_t i = n * k / gs; i < n * (k + 1) / gs; ++i) {
      ++grp.size;
      grp.observed += y[order[i]];
      grp.expected += p[order[i]];
    }
    out.groups.push_back(grp);
  }
  auto sparse = [](const HlGroup& h) {
    return h.expected < 1.0 || static_cast<double>(h.size) - h.expected < 1.0;
  };
  for (std::size_t k = 0; k < out.groups.size() && out.groups.size() > 1;) {
    if (!sparse(out.groups[k])) {
      ++k;
      continue;
    }
    const std::size_t into = k + 1 < out.groups.size() ? k + 1 : k - 1;
    out.notes.push_back("group " + std::to_string(k + 1) + " merged into group " + std::to_string(into + 1) +
                        " (expected count below 1)");
    auto& dst = out.groups[into];
    dst.size += out.groups[k].size;
    dst.observed += out.groups[k].observed;
    dst.expected += out.groups[k].expected;
    out.groups.erase(out.groups.begin() + static_cast<std::ptrdiff_t>(k));
    if (into < k) k = into;
  }
  for (const auto& grp : out.groups) {
    const double ng = static_cast<double>(grp.size);
    const double denom = grp.expected * (1.0 - grp.expected / ng);
    if (denom > 0.0) out.statistic += (grp.observed - grp.expected) * (grp.observed - grp.expected) / denom;
  }
  out.df = static_cast<int>(out.groups.size()) - 2;
  out.p = out.df > 0 ? chi_square_sf(out.statistic, out.df) : std::nan("");
  return out;
}

double auc(std::span<const double> score, std::span<const double> y) {
  if (score.size() != y.size()) throw std::invalid_argument("auc: length mismatch");
  const std::size_t n = score.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });
  double rank_sum = 0.0;
  double n1 = 0.0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && score[order[j]] == score[order[i]]) ++j;
    const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (y[order[t]] != 0.0) {
        rank_sum += avg_rank;
        n1 += 1.0;
      }
    }
    i = j;
  }
  const double n0 = static_cast<double>(n) - n1;
  if (n1 == 0.0 || n0 == 0.0) throw std::invalid_argument("auc: both classes must be present");
  return (rank_sum - n1 * (n1 + 1.0) / 2.0) / (n1 * n0);
}

std::vector<double> cooks_distance(const ModelFit& fit, const DesignMatrix& x, const Eigen::VectorXd& y) {
  const Eigen::Index n = x.x.rows();
  if (fit.fitted.size() != n || y.size() != n) throw std::invalid_argument("cooks_distance: size mismatch");
  const double k = static_cast<double>(x.x.cols());
  std::vector<double> d(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double mu = fit.fitted[i];
    const double v = mu * (1.0 - mu);
    const Eigen::VectorXd xi = x.x.row(i).transpose();
    const double h = v * xi.dot(fit.covariance * xi);
    const double r = (y[i] - mu) / std::sqrt(v);
    d[static_cast<std::size_t>(i)] = r * r * h / (k * (1.0 - h) * (1.0 - h));
  }
  return d;
}

std::vector<std::size_t> cooks_screen(const ModelFit& fit, const DesignMatrix& x, const Eigen::VectorXd& y,
                                      double threshold) {
  const auto d = cooks_distance(fit, x, y);
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] > threshold) out.push_back(i);
  }
  return out;
}

std::vector<CoefficientChange> deletion_changes(const ModelFit& fit, const DesignMatrix& x, const Eigen::VectorXd& y,
                                                std::span<const std::size_t> drop, const FitOptions& options) {
  std::vector<std::size_t> sorted(drop.begin(), drop.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < x.n(); ++i) {
    if (!std::binary_search(sorted.begin(), sorted.end(), i)) keep.push_back(i);
  }
  const auto reduced = subset_rows(x, keep);
  Eigen::VectorXd y_keep(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t i = 0; i < keep.size(); ++i) y_keep[static_cast<Eigen::Index>(i)] = y[static_cast<Eigen::Index>(keep[i])];
  const auto refit = logistic_fit(reduced, y_keep, options);
  std::vector<CoefficientChange> out;
  for (std::size_t j = x.intercept ? 1 : 0; j < fit.names.size(); ++j) {
    const auto idx = static_cast<Eigen::Index>(j);
    CoefficientChange c{fit.names[j], fit.beta[idx], refit.beta[idx], 0.0};
    c.percent = c.before != 0.0 ? std::fabs(c.after - c.before) / std::fabs(c.before) * 100.0 : 0.0;
    out.push_back(c);
  }
  return out;
}

LrTest lr_test(const ModelFit& nested, const ModelFit& full) {
  for (const auto& name : nested.names) {
    if (std::find(full.names.begin(), full.names.end(), name) == full.names.end()) {
      throw std::invalid_argument("lr_test: '" + name + "' is not in the full model");
    }
  }
  if (nested.n != full.n) throw std::invalid_argument("lr_test: models were fit on different data");
  LrTest out;
  out.df = static_cast<int>(full.k) - static_cast<int>(nested.k);
  out.chi2 = std::max(0.0, nested.deviance - full.deviance);
  out.p = out.df > 0 ? chi_square_sf(out.chi2, out.df) : 1.0;
  return out;
}

std::vector<CellContrast> interaction_contrasts(const ModelFit& fit, const std::string& var1,
                                                std::span<const std::string> levels1, const std::string& ref1,
                                                const std::string& var2, std::span<const std::string> levels2,
                                                const std::string& ref2, double z) {
  auto find = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(fit.names.begin(), fit.names.end(), name);
    if (it == fit.names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - fit.names.begin());
  };
  std::vector<CellContrast> out;
  for (const auto& l1 : levels1) {
    for (const auto& l2 : levels2) {
      CellContrast c;
      c.level1 = l1;
      c.level2 = l2;
      std::vector<std::size_t> idx;
      bool missing = false;
      if (l1 != ref1) {
        auto j = find(var1 + "=" + l1);
        if (j) idx.push_back(*j); else missing = true;
      }
      if (l2 != ref2) {
        auto j = find(var2 + "=" + l2);
        if (j) idx.push_back(*j); else missing = true;
      }
      if (l1 != ref1 && l2 != ref2) {
        auto j = find(var1 + "=" + l1 + ":" + var2 + "=" + l2);
        if (j) {
          idx.push_back(*j);
          c.ratio_of_odds_ratios = std::exp(fit.beta[static_cast<Eigen::Index>(*j)]);
        } else {
          missing = true;
        }
      }
      if (missing) {
        c.empty = true;
        out.push_back(std::move(c));
        continue;
      }
      double var = 0.0;
      for (std::size_t a : idx) {
        c.log_or += fit.beta[static_cast<Eigen::Index>(a)];
        for (std::size_t b : idx) var += fit.covariance(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      }
      c.se = std::sqrt(std::max(0.0, var));
      c.odds_ratio = std::exp(c.log_or);
      c.ci_low = std::exp(c.log_or - z * c.se);
      c.ci_high = std::exp(c.log_or + z * c.se);
      out.push_back(std::move(c));
    }
  }
  return out;
}

}  // namespace itf::stats
