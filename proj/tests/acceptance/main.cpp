#include <chrono>
#include <cstdio>
#include <exception>
#include <iterator>
#include <string>

#include "criteria.hpp"

using namespace itf::acceptance;

int main() {
  struct Criterion {
    const char* id;
    const char* title;
    Verdict (*run)();
  };
  const Criterion criteria[] = {
      {"C1", "golden odds ratios", golden_odds_ratios},
      {"C2", "IRLS equals closed-form 2x2", irls_matches_closed_form},
      {"C3", "LASSO KKT, support recovery, SBC argmin", lasso_path_checks},
      {"C4", "AUC, Hosmer-Lemeshow and LRT calibration", diagnostics_checks},
      {"C5", "pipeline round trip", pipeline_round_trip},
      {"C6", "generator calibration", generator_calibration},
      {"C7", "cascade window and cancer rules", cascade_rules},
      {"C8", "cohort eligibility, dedup and Charlson", cohort_rules},
      {"C9", "interaction recovery", interaction_recovery},
      {"C10", "determinism", determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %-4s %-44s %7.2f s\n", v.pass() ? "PASS" : "FAIL", c.id, c.title, secs);
    for (const auto& n : v.notes()) std::printf("       %s\n", n.c_str());
    for (const auto& f : v.failures()) std::printf("       failed: %s\n", f.c_str());
    std::fflush(stdout);
    if (!v.pass()) ++failed;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
