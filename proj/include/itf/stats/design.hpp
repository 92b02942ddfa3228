#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace itf::stats {

/// Column-oriented table of model variables; missing values are nullopt.
class Frame {
 public:
  using Numeric = std::vector<std::optional<double>>;
  using Categorical = std::vector<std::optional<std::string>>;

  /// Throws std::invalid_argument on a duplicate name or a length mismatch.
  void add_numeric(std::string name, Numeric values);
  void add_categorical(std::string name, Categorical values);

  std::size_t rows() const noexcept { return rows_; }
  bool has(std::string_view name) const;
  /// Throws std::out_of_range for unknown names and std::invalid_argument for the wrong kind.
  const Numeric& numeric(std::string_view name) const;
  const Categorical& categorical(std::string_view name) const;

 private:
  struct Column {
    std::string name;
    std::variant<Numeric, Categorical> values;
  };
  const Column& find(std::string_view name) const;
  std::vector<Column> columns_;
  std::size_t rows_ = 0;
  bool sized_ = false;
};

/// One model term. Continuous terms are divided by `increment` (age per 5 years -> 5).
/// Categorical terms expand to one dummy per non-reference level. An interaction crosses
/// two categorical terms declared elsewhere in the same term list.
struct Term {
  enum class Kind { Continuous, Categorical, Interaction };
  Kind kind = Kind::Continuous;
  std::string var;
  std::string label;  // continuous column name; defaults to var
  double increment = 1.0;
  std::vector<std::string> levels;  // categorical: all levels in display order
  std::string reference;
  std::string var2;  // interaction partner

  static Term continuous(std::string var, double increment = 1.0, std::string label = {});
  static Term categorical(std::string var, std::vector<std::string> levels, std::string reference);
  static Term interaction(std::string var, std::string var2);
};

/// Numeric design with named columns.
///
/// Dummy columns are named "var=level", interaction columns "var=level:var2=level2".
/// Rows missing any term variable are dropped (complete-case); `rows` maps design rows to
/// frame rows. Dummy columns with no observations are removed and listed in `dropped`.
struct DesignMatrix {
  std::vector<std::string> names;
  Eigen::MatrixXd x;
  bool intercept = true;
  std::vector<std::size_t> rows;
  std::vector<std::string> dropped;

  std::size_t n() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t k() const { return static_cast<std::size_t>(x.cols()); }
  std::optional<std::size_t> column(std::string_view name) const;
  /// Intercept (if any) plus the named columns, in the given order. Throws std::out_of_range.
  DesignMatrix select(std::span<const std::string> columns) const;
};

inline constexpr std::string_view kInterceptName = "(Intercept)";

/// Throws std::invalid_argument for unknown variables, values outside the declared levels,
/// interactions over undeclared factors, and an empty result.
DesignMatrix build_design(const Frame& frame, std::span<const Term> terms, bool intercept = true);

/// Non-intercept columns that are linear combinations of the columns before them
/// (Gram-Schmidt on unit-norm columns, residual norm below `tolerance`).
std::vector<std::string> aliased_columns(const DesignMatrix& x, double tolerance = 1e-9);

/// Copy restricted to the given design rows.
DesignMatrix subset_rows(const DesignMatrix& x, std::span<const std::size_t> design_rows);

/// Rows of `v` picked by `rows` (design-row order).
Eigen::VectorXd gather(const std::vector<double>& v, const std::vector<std::size_t>& rows);

}  // namespace itf::stats
