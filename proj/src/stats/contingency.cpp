#include "itf/stats/contingency.hpp"

#include <cmath>

namespace itf::stats {

OddsRatio odds_ratio(const ContingencyTable& t, bool haldane, double z) {
  if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0) throw std::invalid_argument("odds_ratio: negative count");
  OddsRatio out;
  double a = static_cast<double>(t.a);
  double b = static_cast<double>(t.b);
  double c = static_cast<double>(t.c);
  double d = static_cast<double>(t.d);
  if (t.a == 0 || t.b == 0 || t.c == 0 || t.d == 0) {
    if (!haldane) throw UndefinedOddsRatio("odds_ratio: zero cell");
    a += 0.5;
    b += 0.5;
    c += 0.5;
    d += 0.5;
    out.corrected = true;
  }
  out.log_or = std::log(a) + std::log(d) - std::log(b) - std::log(c);
  out.se = std::sqrt(1.0 / a + 1.0 / b + 1.0 / c + 1.0 / d);
  out.estimate = std::exp(out.log_or);
  out.ci_low = std::exp(out.log_or - z * out.se);
  out.ci_high = std::exp(out.log_or + z * out.se);
  return out;
}

}  // namespace itf::stats
