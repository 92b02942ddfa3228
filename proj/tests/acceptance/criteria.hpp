#pragma once

#include <sstream>
#include <string>
#include <vector>

namespace itf::acceptance {

/// Outcome of one criterion: every failed requirement is kept with its measured values.
class Verdict {
 public:
  /// Records `what` as a failure unless `ok`.
  void require(bool ok, const std::string& what) {
    if (!ok) failures_.push_back(what);
  }
  void note(const std::string& text) { notes_.push_back(text); }

  bool pass() const { return failures_.empty(); }
  const std::vector<std::string>& failures() const { return failures_; }
  const std::vector<std::string>& notes() const { return notes_; }

 private:
  std::vector<std::string> failures_;
  std::vector<std::string> notes_;
};

/// Fixed-precision formatting for messages.
template <typename T>
std::string fmt(T v, int precision = 4) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

Verdict golden_odds_ratios();
Verdict irls_matches_closed_form();
Verdict lasso_path_checks();
Verdict diagnostics_checks();
Verdict pipeline_round_trip();
Verdict generator_calibration();
Verdict cascade_rules();
Verdict cohort_rules();
Verdict interaction_recovery();
Verdict determinism();

}  // namespace itf::acceptance
