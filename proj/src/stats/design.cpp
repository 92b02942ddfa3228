#include "itf/stats/design.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace itf::stats {

void Frame::add_numeric(std::string name, Numeric values) {
  if (has(name)) throw std::invalid_argument("frame: duplicate column " + name);
  if (sized_ && values.size() != rows_) throw std::invalid_argument("frame: length mismatch in " + name);
  rows_ = values.size();
  sized_ = true;
  columns_.push_back({std::move(name), std::move(values)});
}

void Frame::add_categorical(std::string name, Categorical values) {
  if (has(name)) throw std::invalid_argument("frame: duplicate column " + name);
  if (sized_ && values.size() != rows_) throw std::invalid_argument("frame: length mismatch in " + name);
  rows_ = values.size();
  sized_ = true;
  columns_.push_back({std::move(name), std::move(values)});
}

bool Frame::has(std::string_view name) const {
  return std::any_of(columns_.begin(), columns_.end(), [&](const Column& c) { return c.name == name; });
}

const Frame::Column& Frame::find(std::string_view name) const {
  for (const auto& c : columns_) {
    if (c.name == name) return c;
  }
  throw std::out_of_range("frame: no column " + std::string(name));
}

const Frame::Numeric& Frame::numeric(std::string_view name) const {
  const auto& c = find(name);
  if (!std::holds_alternative<Numeric>(c.values)) throw std::invalid_argument(std::string(name) + " is not numeric");
  return std::get<Numeric>(c.values);
}

const Frame::Categorical& Frame::categorical(std::string_view name) const {
  const auto& c = find(name);
  if (!std::holds_alternative<Categorical>(c.values)) {
    throw std::invalid_argument(std::string(name) + " is not categorical");
  }
  return std::get<Categorical>(c.values);
}

Term Term::continuous(std::string var, double increment, std::string label) {
  if (!(increment > 0.0)) throw std::invalid_argument("term increment must be positive");
  Term t;
  t.kind = Kind::Continuous;
  t.label = label.empty() ? var : std::move(label);
  t.var = std::move(var);
  t.increment = increment;
  return t;
}

Term Term::categorical(std::string var, std::vector<std::string> levels, std::string reference) {
  if (std::find(levels.begin(), levels.end(), reference) == levels.end()) {
    throw std::invalid_argument("reference level '" + reference + "' not among the levels of " + var);
  }
  Term t;
  t.kind = Kind::Categorical;
  t.var = std::move(var);
  t.levels = std::move(levels);
  t.reference = std::move(reference);
  return t;
}

Term Term::interaction(std::string var, std::string var2) {
  Term t;
  t.kind = Kind::Interaction;
  t.var = std::move(var);
  t.var2 = std::move(var2);
  return t;
}

std::optional<std::size_t> DesignMatrix::column(std::string_view name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

DesignMatrix DesignMatrix::select(std::span<const std::string> columns) const {
  std::vector<std::size_t> idx;
  if (intercept) idx.push_back(0);
  for (const auto& c : columns) {
    auto j = column(c);
    if (!j) throw std::out_of_range("design: no column " + c);
    if (intercept && *j == 0) continue;
    idx.push_back(*j);
  }
  DesignMatrix out;
  out.intercept = intercept;
  out.rows = rows;
  out.x.resize(x.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) {
    out.names.push_back(names[idx[k]]);
    out.x.col(static_cast<Eigen::Index>(k)) = x.col(static_cast<Eigen::Index>(idx[k]));
  }
  return out;
}

DesignMatrix build_design(const Frame& frame, std::span<const Term> terms, bool intercept) {
  std::map<std::string, const Term*> factors;
  for (const auto& t : terms) {
    if (t.kind != Term::Kind::Interaction && !frame.has(t.var)) {
      throw std::invalid_argument("design: unknown variable " + t.var);
    }
    if (t.kind == Term::Kind::Categorical) factors[t.var] = &t;
  }
  for (const auto& t : terms) {
    if (t.kind == Term::Kind::Interaction && (!factors.count(t.var) || !factors.count(t.var2))) {
      throw std::invalid_argument("interaction " + t.var + ":" + t.var2 + " needs both factors as terms");
    }
  }
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < frame.rows(); ++r) {
    bool complete = true;
    for (const auto& t : terms) {
      if (t.kind == Term::Kind::Continuous) {
        complete = complete && frame.numeric(t.var)[r].has_value();
      } else if (t.kind == Term::Kind::Categorical) {
        const auto& v = frame.categorical(t.var)[r];
        if (v && std::find(t.levels.begin(), t.levels.end(), *v) == t.levels.end()) {
          throw std::invalid_argument("value '" + *v + "' is not a declared level of " + t.var);
        }
        complete = complete && v.has_value();
      }
    }
    if (complete) keep.push_back(r);
  }
  if (keep.empty()) throw std::invalid_argument("design: no complete rows");

  std::vector<std::string> names;
  std::vector<Eigen::VectorXd> cols;
  const auto n = static_cast<Eigen::Index>(keep.size());
  if (intercept) {
    names.emplace_back(kInterceptName);
    cols.push_back(Eigen::VectorXd::Ones(n));
  }
  auto dummy = [&](const Term& f, const std::string& level) {
    Eigen::VectorXd v(n);
    const auto& values = frame.categorical(f.var);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = *values[keep[static_cast<std::size_t>(i)]] == level ? 1.0 : 0.0;
    return v;
  };
  std::vector<std::string> dropped;
  auto push = [&](std::string name, Eigen::VectorXd v) {
    if ((v.array() == 0.0).all()) {
      dropped.push_back(std::move(name));
    } else {
      names.push_back(std::move(name));
      cols.push_back(std::move(v));
    }
  };
  for (const auto& t : terms) {
    switch (t.kind) {
      case Term::Kind::Continuous: {
        Eigen::VectorXd v(n);
        const auto& values = frame.numeric(t.var);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = *values[keep[static_cast<std::size_t>(i)]] / t.increment;
        push(t.label, std::move(v));
        break;
      }
      case Term::Kind::Categorical:
        for (const auto& level : t.levels) {
          if (level == t.reference) continue;
          push(t.var + "=" + level, dummy(t, level));
        }
        break;
      case Term::Kind::Interaction: {
        const Term& f1 = *factors.at(t.var);
        const Term& f2 = *factors.at(t.var2);
        for (const auto& l1 : f1.levels) {
          if (l1 == f1.reference) continue;
          const Eigen::VectorXd d1 = dummy(f1, l1);
          for (const auto& l2 : f2.levels) {
            if (l2 == f2.reference) continue;
            push(t.var + "=" + l1 + ":" + t.var2 + "=" + l2, d1.cwiseProduct(dummy(f2, l2)));
          }
        }
        break;
      }
    }
  }
  DesignMatrix out;
  out.intercept = intercept;
  out.names = std::move(names);
  out.dropped = std::move(dropped);
  out.rows = std::move(keep);
  out.x.resize(n, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.x.col(static_cast<Eigen::Index>(j)) = cols[j];
  return out;
}

std::vector<std::string> aliased_columns(const DesignMatrix& x, double tolerance) {
  std::vector<Eigen::VectorXd> basis;
  std::vector<std::string> aliased;
  for (Eigen::Index j = 0; j < x.x.cols(); ++j) {
    Eigen::VectorXd v = x.x.col(j);
    const double norm = v.norm();
    bool independent = norm > 0.0;
    if (independent) {
      v /= norm;
      for (int pass = 0; pass < 2; ++pass) {
        for (const auto& q : basis) v -= q.dot(v) * q;
      }
      independent = v.norm() > tolerance;
    }
    if (independent) {
      basis.push_back(v / v.norm());
    } else if (!(x.intercept && j == 0)) {
      aliased.push_back(x.names[static_cast<std::size_t>(j)]);
    }
  }
  return aliased;
}

DesignMatrix subset_rows(const DesignMatrix& x, std::span<const std::size_t> design_rows) {
  DesignMatrix out;
  out.names = x.names;
  out.intercept = x.intercept;
  out.dropped = x.dropped;
  out.x.resize(static_cast<Eigen::Index>(design_rows.size()), x.x.cols());
  for (std::size_t i = 0; i < design_rows.size(); ++i) {
    out.x.row(static_cast<Eigen::Index>(i)) = x.x.row(static_cast<Eigen::Index>(design_rows[i]));
    out.rows.push_back(x.rows.at(design_rows[i]));
  }
  return out;
}

Eigen::VectorXd gather(const std::vector<double>& v, const std::vector<std::size_t>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = v.at(rows[i]);
  return out;
}

}  // namespace itf::stats
