#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "criteria.hpp"
#include "itf/analysis.hpp"
#include "itf/corpus.hpp"
#include "itf/enum_names.hpp"
#include "itf/rng.hpp"
#include "itf/stats/contingency.hpp"
#include "itf/stats/design.hpp"
#include "itf/stats/diagnostics.hpp"
#include "itf/stats/lasso.hpp"
#include "itf/stats/logistic.hpp"
#include "itf/synthgen.hpp"
#include "itf/tables.hpp"

namespace itf::acceptance {
namespace {

using stats::ContingencyTable;
using stats::DesignMatrix;

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

DesignMatrix with_intercept(const Eigen::MatrixXd& cols) {
  DesignMatrix d;
  d.names.push_back(std::string(stats::kInterceptName));
  for (Eigen::Index j = 0; j < cols.cols(); ++j) d.names.push_back("x" + std::to_string(j + 1));
  d.x.resize(cols.rows(), cols.cols() + 1);
  d.x.col(0).setOnes();
  d.x.rightCols(cols.cols()) = cols;
  d.rows.resize(static_cast<std::size_t>(cols.rows()));
  std::iota(d.rows.begin(), d.rows.end(), 0);
  return d;
}

double sigmoid(double eta) { return 1.0 / (1.0 + std::exp(-eta)); }

/// Kolmogorov-Smirnov test of `u` against Uniform(0,1); asymptotic p-value with the
/// Stephens small-sample correction.
double ks_uniform_p(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - u[i], u[i] - static_cast<double>(i) / n});
  }
  const double lambda = (std::sqrt(n) + 0.12 + 0.11 / std::sqrt(n)) * d;
  double q = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(q, 0.0, 1.0);
}

}  // namespace

Verdict golden_odds_ratios() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  struct Row {
    const char* name;
    ContingencyTable t;
    const char* expected;
    int decimals;
  };
  const Row rows[] = {
      {"biopsy", {555, 8522, 148, 106458}, "46.8 (39.0, 56.2)", 1},
      {"nodule", {2026, 7051, 676, 105930}, "45.0 (41.1, 49.3)", 1},
      {"partial thyroidectomy", {96, 8981, 13, 106593}, "87.6 (49.1, 156.5)", 1},
      {"total thyroidectomy", {66, 9011, 14, 106592}, "55.8 (31.3, 99.3)", 1},
      {"cancer", {109, 8968, 21, 106585}, "61.7 (38.6, 98.5)", 1},
      {"female", {5860, 55353, 3208, 51219}, "1.69 (1.62, 1.77)", 2},
  };
  for (const auto& r : rows) {
    const auto o = stats::odds_ratio(r.t);
    const auto text = or_text(o.estimate, o.ci_low, o.ci_high, r.decimals);
    v.require(text == r.expected, std::string(r.name) + ": got " + text + ", expected " + r.expected);
  }
  // The rendered table carries the same strings.
  std::vector<OutcomeCounts> counts;
  for (std::size_t i = 0; i < 5; ++i) {
    static const char* keys[] = {"biopsy", "nodule", "partial_thyroidectomy", "total_thyroidectomy", "cancer"};
    const auto& t = rows[i].t;
    counts.push_back({keys[i], t.a, t.b, t.c, t.d});
  }
  const auto table = table3(counts);
  const auto col = static_cast<std::size_t>(
      std::find(table.header.begin(), table.header.end(), "odds_ratio_95ci") - table.header.begin());
  for (std::size_t i = 0; i < 5; ++i) {
    v.require(table.rows.at(i).at(col) == rows[i].expected, std::string("table3 row ") + rows[i].name);
  }
  const double secs = seconds_since(start);
  v.require(secs < 1.0, "took " + fmt(secs) + " s (limit 1 s)");
  return v;
}

Verdict irls_matches_closed_form() {
  Verdict v;
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  double worst_slope = 0.0, worst_se = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const ContingencyTable t{rng.between(1, 3000), rng.between(1, 120000), rng.between(1, 3000),
                             rng.between(1, 120000)};
    Eigen::MatrixXd e(4, 1);
    e << 1, 1, 0, 0;
    Eigen::VectorXd y(4), w(4);
    y << 1, 0, 1, 0;
    w << static_cast<double>(t.a), static_cast<double>(t.b), static_cast<double>(t.c), static_cast<double>(t.d);
    const auto fit = stats::logistic_fit(with_intercept(e), y, {}, w);
    const auto o = stats::odds_ratio(t);
    worst_slope = std::max(worst_slope, std::abs(fit.beta[1] - o.log_or));
    worst_se = std::max(worst_se, std::abs(fit.se[1] - o.se));
  }
  v.note("max |slope - ln OR| = " + fmt(worst_slope, 3) + ", max |SE - Wald SE| = " + fmt(worst_se, 3));
  v.require(worst_slope < 1e-6, "slope deviation " + fmt(worst_slope, 3));
  v.require(worst_se < 1e-6, "SE deviation " + fmt(worst_se, 3));
  const double secs = seconds_since(start);
  v.require(secs < 10.0, "took " + fmt(secs) + " s (limit 10 s)");
  return v;
}

Verdict lasso_path_checks() {
  Verdict v;

  // KKT conditions on every grid point of 50 random instances.
  double worst_kkt = 0.0;
  for (int inst = 0; inst < 50; ++inst) {
    Rng rng(derive_seed(77, static_cast<std::uint64_t>(inst)));
    const int n = 200 + static_cast<int>(rng.below(600));
    const int p = 2 + static_cast<int>(rng.below(10));
    const double rho = rng.uniform(0.0, 0.6);
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    for (int j = 0; j < p; ++j) beta[j] = rng.bernoulli(0.4) ? rng.uniform(-1.5, 1.5) : 0.0;
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      const double common = rng.normal();
      for (int j = 0; j < p; ++j) x(i, j) = std::sqrt(1 - rho) * rng.normal() + std::sqrt(rho) * common;
      if (rng.bernoulli(0.3)) x(i, 0) = std::round(x(i, 0));
      y[i] = rng.bernoulli(sigmoid(-0.7 + x.row(i).dot(beta))) ? 1.0 : 0.0;
    }
    const auto d = with_intercept(x);
    const auto grid = stats::default_lambda_grid(d, y, 40, 1e-3);
    const auto path = stats::lasso_path(d, y, grid);
    for (const auto& pt : path.points) {
      worst_kkt = std::max(worst_kkt, stats::kkt_violation(d, y, path.standardization, pt));
    }
  }
  v.note("max KKT violation over 50 paths = " + fmt(worst_kkt, 3));
  v.require(worst_kkt <= 1e-6, "KKT violation " + fmt(worst_kkt, 3));

  // Support recovery with SBC selection, and the emitted SBC column's argmin.
  int recovered = 0;
  int argmin_mismatch = 0;
  const std::vector<std::string> truth{"x1", "x4", "x7"};
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(derive_seed(1000, static_cast<std::uint64_t>(seed)));
    const int n = 2000, p = 10;
    Eigen::MatrixXd x(n, p);
    Eigen::VectorXd y(n);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    beta[0] = 1.0;
    beta[3] = -1.2;
    beta[6] = 1.5;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) x(i, j) = rng.normal();
      y[i] = rng.bernoulli(sigmoid(-0.5 + x.row(i).dot(beta))) ? 1.0 : 0.0;
    }
    const auto d = with_intercept(x);
    AnalysisResult r;
    r.path = stats::lasso_path(d, y, stats::default_lambda_grid(d, y));
    const auto& support = r.path.support;
    if (std::all_of(truth.begin(), truth.end(), [&](const std::string& t) {
          return std::find(support.begin(), support.end(), t) != support.end();
        })) {
      ++recovered;
    }
    const auto table = lasso_table(r);
    const auto sbc_col = static_cast<std::size_t>(
        std::find(table.header.begin(), table.header.end(), "sbc") - table.header.begin());
    const auto sel_col = static_cast<std::size_t>(
        std::find(table.header.begin(), table.header.end(), "selected") - table.header.begin());
    std::size_t argmin = 0, flagged = table.rows.size();
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      if (std::stod(table.rows[i][sbc_col]) < std::stod(table.rows[argmin][sbc_col])) argmin = i;
      if (table.rows[i][sel_col] == "1") flagged = i;
    }
    if (argmin != flagged) ++argmin_mismatch;
  }
  v.note("true support recovered in " + std::to_string(recovered) + "/100 seeds");
  v.require(recovered >= 95, "support recovered in only " + std::to_string(recovered) + "/100 seeds");
  v.require(argmin_mismatch == 0, std::to_string(argmin_mismatch) + " paths flag a point other than the SBC argmin");
  return v;
}

Verdict diagnostics_checks() {
  Verdict v;

  // AUC against the all-pairs concordance.
  double worst_auc = 0.0;
  for (int inst = 0; inst < 20; ++inst) {
    Rng rng(derive_seed(5, static_cast<std::uint64_t>(inst)));
    const std::size_t n = 50 + rng.below(300);
    std::vector<double> s(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = inst % 2 ? std::round(rng.uniform() * 20.0) / 20.0 : rng.uniform();
      y[i] = rng.bernoulli(0.2 + 0.5 * s[i]) ? 1.0 : 0.0;
    }
    if (std::count(y.begin(), y.end(), 1.0) == 0 || std::count(y.begin(), y.end(), 0.0) == 0) continue;
    double conc = 0.0, pairs = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (y[i] == 1.0 && y[j] == 0.0) {
          pairs += 1.0;
          conc += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
        }
      }
    }
    worst_auc = std::max(worst_auc, std::abs(stats::auc(s, y) - conc / pairs));
  }
  v.require(worst_auc <= 1e-12, "AUC deviates from brute force by " + fmt(worst_auc, 3));

  // Hosmer-Lemeshow on a 20-observation, two-group fixture computed by hand:
  // group 1 O = 2, E = 2.275; group 2 O = 7, E = 6.775; ten observations each.
  {
    std::vector<double> p;
    for (int i = 0; i < 20; ++i) p.push_back(0.025 + 0.045 * i);
    const std::vector<double> y{0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 1};
    const double hand = 0.075625 / (2.275 * 0.7725) + 0.050625 / (6.775 * 0.3225);
    const auto hl = stats::hosmer_lemeshow(p, y, 2);
    v.require(std::abs(hl.statistic - hand) < 1e-12,
              "HL fixture statistic " + fmt(hl.statistic, 12) + " vs " + fmt(hand, 12));
  }

  // Null calibration of HL and of the LRT over 500 correctly specified data sets.
  int rejections = 0;
  std::vector<double> lrt_p;
  for (int seed = 0; seed < 500; ++seed) {
    Rng rng(derive_seed(314, static_cast<std::uint64_t>(seed)));
    const int n = 1000;
    Eigen::MatrixXd x(n, 2);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      x(i, 0) = rng.normal();
      x(i, 1) = rng.normal();  // pure noise
      y[i] = rng.bernoulli(sigmoid(-1.0 + 0.8 * x(i, 0))) ? 1.0 : 0.0;
    }
    const auto full_x = with_intercept(x);
    const auto full = stats::logistic_fit(full_x, y);
    const std::vector<std::string> keep{"x1"};
    const auto nested = stats::logistic_fit(full_x.select(keep), y);
    const std::vector<double> fitted(nested.fitted.data(), nested.fitted.data() + nested.fitted.size());
    const std::vector<double> yv(y.data(), y.data() + y.size());
    if (stats::hosmer_lemeshow(fitted, yv, 10).p < 0.05) ++rejections;
    lrt_p.push_back(stats::lr_test(nested, full).p);
  }
  const double rate = rejections / 500.0;
  const double ks = ks_uniform_p(lrt_p);
  v.note("HL rejection rate at 0.05 = " + fmt(rate) + "; LRT null KS p = " + fmt(ks));
  v.require(rate >= 0.03 && rate <= 0.08, "HL null rejection rate " + fmt(rate) + " outside [0.03, 0.08]");
  v.require(ks > 0.01, "LRT null p-values fail KS uniformity (p = " + fmt(ks) + ")");
  return v;
}

Verdict interaction_recovery() {
  Verdict v;
  GenConfig cfg;
  cfg.seed = 1;
  const std::size_t n = 200000;
  const auto subjects = sample_subjects(cfg, n);

  stats::Frame frame;
  stats::Frame::Categorical sex, modality, body;
  stats::Frame::Numeric age, bmi;
  std::vector<double> y;
  for (const auto& s : subjects) {
    sex.emplace_back(std::string(to_string(s.sex)));
    modality.emplace_back(std::string(to_string(s.modality)));
    body.emplace_back(std::string(to_string(s.body_group)));
    age.emplace_back(static_cast<double>(s.age_years));
    bmi.emplace_back(s.bmi);
    y.push_back(s.itf ? 1.0 : 0.0);
  }
  frame.add_categorical("sex", sex);
  frame.add_categorical("modality", modality);
  frame.add_categorical("body_group", body);
  frame.add_numeric("age", age);
  frame.add_numeric("bmi", bmi);

  std::vector<std::string> mods, bodies;
  for (auto m : EnumNames<Modality>::names) mods.emplace_back(m);
  for (auto b : EnumNames<BodyGroup>::names) bodies.emplace_back(b);
  const std::vector<stats::Term> terms{
      stats::Term::categorical("sex", {"Male", "Female"}, "Male"),
      stats::Term::continuous("age", 5.0, "age_per_5y"),
      stats::Term::continuous("bmi", 5.0, "bmi_per_5"),
      stats::Term::categorical("modality", mods, "CT"),
      stats::Term::categorical("body_group", bodies, "Chest"),
      stats::Term::interaction("modality", "body_group"),
  };
  auto design = stats::build_design(frame, terms);
  const auto aliased = stats::aliased_columns(design);
  std::vector<std::string> full_cols, main_cols;
  for (std::size_t j = 1; j < design.names.size(); ++j) {
    const auto& name = design.names[j];
    if (std::find(aliased.begin(), aliased.end(), name) != aliased.end()) continue;
    full_cols.push_back(name);
    if (name.find(':') == std::string::npos) main_cols.push_back(name);
  }
  const auto full_x = design.select(full_cols);
  const auto yv = stats::gather(y, design.rows);
  const auto full = stats::logistic_fit(full_x, yv);
  const auto main = stats::logistic_fit(design.select(main_cols), yv);
  const auto lrt = stats::lr_test(main, full);

  const auto cells = stats::interaction_contrasts(full, "modality", mods, "CT", "body_group", bodies, "Chest");
  const auto it = std::find_if(cells.begin(), cells.end(), [](const stats::CellContrast& c) {
    return c.level1 == "NuclearMedicine" && c.level2 == "Neck";
  });
  const double target = 25.54;
  if (it == cells.end() || !it->odds_ratio) {
    v.require(false, "no NuclearMedicine x Neck contrast");
  } else {
    v.note("NuclearMedicine x Neck OR " + fmt(*it->odds_ratio) + " (" + fmt(*it->ci_low) + ", " + fmt(*it->ci_high) +
           "); interaction LRT chi2 " + fmt(lrt.chi2) + " on " + std::to_string(lrt.df) + " df, p = " + fmt(lrt.p, 3));
    v.require(*it->ci_low <= target && target <= *it->ci_high, "95% CI excludes " + fmt(target));
  }
  v.require(lrt.p < 1e-4, "interaction LRT p = " + fmt(lrt.p, 3));
  return v;
}

}  // namespace itf::acceptance
