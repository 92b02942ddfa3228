#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "itf/cascade.hpp"
#include "itf/cohort.hpp"
#include "itf/extract.hpp"

namespace itf {

/// A rendered table: CSV for machines, column-aligned text for readers.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string csv() const;
  /// Columns padded to their widest cell, measured in code points.
  std::string text() const;
};

/// "1.69 (1.62, 1.77)" at the given precision.
std::string or_text(double estimate, double low, double high, int decimals);

// --- univariate characteristics by ITF status ----------------------------------

/// Age band used for the categorical age rows: 18-54, 55-64, 65+.
std::string age_band(int age_years);

/// Counts and column percentages by ITF status with univariate ORs (2 decimals):
/// 2x2 odds ratios against the reference level for factors, per-5 logistic slopes for
/// age and BMI. Missing values are left out of that variable's counts.
Table table1(std::span<const CohortRow> eligible, const std::map<std::string, bool>& itf_by_patient);

// --- nodule feature distribution ---------------------------------------------------

/// Feature prevalence among ITN findings and subcategory shares among those reporting it.
Table table2(std::span<const FindingResult> itn_findings);

// --- outcomes -------------------------------------------------------------------------

struct OutcomeCounts {
  std::string outcome;  // machine key: ultrasound, nodule, biopsy, partial_thyroidectomy, ...
  std::int64_t itf_yes = 0;
  std::int64_t itf_no = 0;
  std::int64_t non_itf_yes = 0;
  std::int64_t non_itf_no = 0;

  bool operator==(const OutcomeCounts&) const = default;
};

/// Display label of an outcome key; the key itself when unknown.
std::string outcome_label(const std::string& key);

/// One row per outcome in the order ultrasound, nodule, biopsy, partial thyroidectomy,
/// total thyroidectomy, cancer.
std::vector<OutcomeCounts> outcome_counts(std::span<const CascadeOutcomes> outcomes);

std::string counts_csv(std::span<const OutcomeCounts> counts);
/// Throws ParseError on missing columns or non-integer counts, ValidationError on negatives.
std::vector<OutcomeCounts> read_counts_csv(const std::filesystem::path& path);

/// Outcome counts with percentages and the ITF-vs-none OR (1 decimal). Zero cells print NA.
Table table3(std::span<const OutcomeCounts> counts);

}  // namespace itf
