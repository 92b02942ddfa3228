#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "itf/cohort.hpp"
#include "itf/corpus.hpp"
#include "itf/extract.hpp"
#include "itf/rng.hpp"
#include "itf/timeline.hpp"

namespace itf {

/// Per-arm probabilities. `ultrasound` is unconditional; the rest are conditional on a
/// linked ultrasound, since downstream outcomes only count after one.
struct OutcomeRates {
  double ultrasound = 0.0;
  double nodule_dx = 0.0;
  double biopsy = 0.0;
  double partial_thyroidectomy = 0.0;
  double total_thyroidectomy = 0.0;
  double cancer = 0.0;
};

struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t n_patients = 0;
  double itf_prevalence = 0.078;
  double itn_share = 0.929;
  /// Keys: location, size, recommendation, density, calcification, attenuation,
  /// metabolic_activity, enhancement. Rates are among ITN reports.
  std::map<std::string, double> feature_presence = default_feature_presence();
  double size_mean_cm = 1.6;
  double size_sd_cm = 1.2;
  std::array<double, 5> modality_mix = default_modality_mix();  // Modality order
  std::array<double, 4> body_mix = default_body_mix();          // BodyGroup order
  double negation_rate = 0.15;
  double distractor_rate = 0.10;

  double duplicate_rate = 0.02;  // second same-day study
  double minor_rate = 0.01;
  double short_lookback_rate = 0.02;
  double prior_history_rate = 0.02;
  double bmi_missing_rate = 0.03;
  OutcomeRates itf_outcomes{0.202, 0.9, 0.302, 0.052, 0.036, 0.059};
  OutcomeRates non_itf_outcomes{0.008, 0.79, 0.17, 0.015, 0.016, 0.025};

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  static std::map<std::string, double> default_feature_presence();
  static std::array<double, 5> default_modality_mix();
  static std::array<double, 4> default_body_mix();
};

/// Canonical key=value listing of every field, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_items(const GenConfig& config);
/// Sets one field from its config_items() key. Throws std::invalid_argument.
void set_config_value(GenConfig& config, const std::string& key, const std::string& value);

/// Truncated lognormal on [0.1, 8.0] cm, reported to one decimal.
///
/// sigma comes from the closed-form lognormal moment match to (mean, sd); mu is then
/// re-solved so that the truncated distribution's mean equals `mean` exactly.
class SizeSampler {
 public:
  /// Throws std::invalid_argument unless mean > 0 and sd > 0.
  SizeSampler(double mean_cm, double sd_cm);
  double operator()(Rng& rng) const;
  double mu() const { return mu_; }
  double sigma() const { return sigma_; }

  static constexpr double kLow = 0.1;
  static constexpr double kHigh = 8.0;

 private:
  double mu_;
  double sigma_;
};

double size_sampler(const GenConfig& config, Rng& rng);

/// Cell odds ratio relative to CT of the chest for one modality and body group.
double cell_odds_ratio(Modality m, BodyGroup g);

struct Subject {
  Sex sex = Sex::Female;
  int age_years = 0;
  double bmi = 0.0;  // always drawn; a timeline may still hide it
  Modality modality = Modality::CT;
  BodyGroup body_group = BodyGroup::Chest;
  bool itf = false;
};

/// Logistic ITF model: sex, age per 5 years, BMI per 5 units, and one log odds ratio per
/// modality and body cell. The intercept is calibrated on a fixed pilot sample so that
/// the mean risk equals the configured prevalence.
class ItfRiskModel {
 public:
  explicit ItfRiskModel(const GenConfig& config);

  double probability(const Subject& s) const;
  double intercept() const { return intercept_; }
  /// P(PET or nuclear medicine | ITF) under the pilot sample.
  double pet_nm_share_among_itf() const { return pet_nm_share_; }

  static constexpr double kLnFemale = 0.6043159668533296;  // ln 1.83
  static constexpr double kLnAgePer5 = 0.09075436326846412;  // ln 1.095
  static constexpr double kLnBmiPer5 = 0.02955880224154443;  // ln 1.03

 private:
  double linear(const Subject& s) const;
  double intercept_ = 0.0;
  double pet_nm_share_ = 0.0;
};

/// Draws sex, age, BMI, modality and body group from the cohort marginals.
Subject draw_subject(const GenConfig& config, Rng& rng);

/// Covariates plus ITF outcome for `n` subjects; stream i uses derive_seed(seed, i).
std::vector<Subject> sample_subjects(const GenConfig& config, std::size_t n);

struct OutcomeTruth {
  bool ultrasound = false;
  bool nodule_dx = false;
  bool biopsy = false;
  bool partial_thyroidectomy = false;
  bool total_thyroidectomy = false;
  bool cancer = false;
};

struct PatientTruth {
  std::string patient_id;
  std::vector<std::string> report_ids;
  Eligibility intended = Eligibility::Eligible;
  Subject subject;
  ReportLabel label = ReportLabel::NoFinding;
  /// Attributes the extractor should recover for this patient's reports.
  FindingResult expected;
  OutcomeTruth outcomes;
  bool hard_case = false;  // a negation or distractor template the lexicon rules misread
};

struct SynthCorpus {
  std::vector<ReportDoc> docs;
  std::vector<AnnotatedReport> gold;
  std::vector<PatientTimeline> timelines;
  std::vector<PatientTruth> truth;
};

/// Deterministic for a fixed config and independent of `threads`: patient i is generated
/// from derive_seed(seed, i) and results are merged in patient order.
SynthCorpus generate(const GenConfig& config, unsigned threads = 1);

}  // namespace itf
