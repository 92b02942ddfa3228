#pragma once

#include <cstdint>
#include <stdexcept>

namespace itf::stats {

/// 2x2 counts: a exposed-event, b exposed-nonevent, c unexposed-event, d unexposed-nonevent.
struct ContingencyTable {
  std::int64_t a = 0;
  std::int64_t b = 0;
  std::int64_t c = 0;
  std::int64_t d = 0;
};

struct OddsRatio {
  double estimate = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double log_or = 0.0;
  double se = 0.0;  // of log_or
  bool corrected = false;  // Haldane-Anscombe +0.5 applied
};

class UndefinedOddsRatio : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline constexpr double kZ95 = 1.96;

/// OR = ad/bc with a log-scale Wald interval exp(ln OR ± z·sqrt(1/a+1/b+1/c+1/d)).
///
/// A zero cell throws UndefinedOddsRatio unless `haldane` is set, in which case 0.5 is
/// added to every cell. Negative counts throw std::invalid_argument.
OddsRatio odds_ratio(const ContingencyTable& t, bool haldane = false, double z = kZ95);

}  // namespace itf::stats
