#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>

#include "itf/corpus.hpp"
#include "itf/detect.hpp"
#include "itf/extract.hpp"
#include "itf/rng.hpp"
#include "itf/synthgen.hpp"
#include "itf/timeline.hpp"

using namespace itf;

namespace {

std::string serialize(const SynthCorpus& c) {
  std::ostringstream out;
  write_corpus(out, c.docs);
  write_annotations(out, c.gold);
  write_timelines(out, c.timelines);
  return out.str();
}

}  // namespace

TEST_CASE("generate with zero patients yields empty outputs") {
  GenConfig cfg;
  cfg.n_patients = 0;
  const auto c = generate(cfg);
  CHECK(c.docs.empty());
  CHECK(c.gold.empty());
  CHECK(c.timelines.empty());
}

TEST_CASE("generate is deterministic and thread-count invariant") {
  GenConfig cfg;
  cfg.seed = 99;
  cfg.n_patients = 400;
  const auto a = serialize(generate(cfg, 1));
  CHECK(a == serialize(generate(cfg, 1)));
  CHECK(a == serialize(generate(cfg, 4)));
  cfg.seed = 100;
  CHECK(a != serialize(generate(cfg, 1)));
}

TEST_CASE("invalid configurations are rejected") {
  GenConfig cfg;
  cfg.itf_prevalence = 1.5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GenConfig{};
  cfg.modality_mix[0] += 0.01;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GenConfig{};
  cfg.feature_presence["location"] = -0.1;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = GenConfig{};
  cfg.size_sd_cm = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  CHECK_NOTHROW(GenConfig{}.validate());
}

TEST_CASE("config items round trip through set_config_value") {
  GenConfig cfg;
  cfg.seed = 17;
  cfg.negation_rate = 0.0;
  GenConfig copy;
  for (const auto& [key, value] : config_items(cfg)) set_config_value(copy, key, value);
  CHECK(config_items(copy) == config_items(cfg));
  CHECK_THROWS_AS(set_config_value(copy, "no_such_key", "1"), std::invalid_argument);
}

TEST_CASE("size sampler matches the moment targets") {
  const SizeSampler sampler(1.6, 1.2);
  Rng rng(1);
  const int n = 100000;
  double sum = 0.0, sum2 = 0.0;
  int up_to_1 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = sampler(rng);
    CHECK(x >= SizeSampler::kLow);
    CHECK(x <= SizeSampler::kHigh);
    CHECK(std::abs(x * 10.0 - std::round(x * 10.0)) < 1e-9);
    sum += x;
    sum2 += x * x;
    if (bin_size(x) == SizeBin::UpTo1) ++up_to_1;
  }
  const double mean = sum / n;
  const double sd = std::sqrt((sum2 - n * mean * mean) / (n - 1));
  CHECK(mean >= 1.55);
  CHECK(mean <= 1.65);
  CHECK(sd >= 1.1);
  CHECK(sd <= 1.3);
  CHECK(std::abs(static_cast<double>(up_to_1) / n - 0.38) <= 0.03);
}

TEST_CASE("size sampler degenerates to the mean as sd goes to zero") {
  const SizeSampler sampler(1.6, 1e-9);
  Rng rng(2);
  for (int i = 0; i < 1000; ++i) CHECK(sampler(rng) == doctest::Approx(1.6));
  CHECK_THROWS_AS(SizeSampler(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SizeSampler(1.6, -1.0), std::invalid_argument);
}

TEST_CASE("clean synthetic reports are recovered exactly by the lexicon backend") {
  GenConfig cfg;
  cfg.seed = 21;
  cfg.n_patients = 3000;
  cfg.negation_rate = 0.0;
  cfg.distractor_rate = 0.0;
  const auto c = generate(cfg);
  const auto backend = lexicon_backend();
  const auto found = run_pipeline(c.docs, *backend, default_scanner());
  REQUIRE(found.size() == c.gold.size());
  for (std::size_t i = 0; i < found.size(); ++i) {
    CHECK(found[i].report_id == c.gold[i].report_id);
    CHECK(found[i].label == c.gold[i].report_label);
    auto spans = found[i].spans;
    auto gold = c.gold[i].spans;
    std::sort(spans.begin(), spans.end(), span_less);
    std::sort(gold.begin(), gold.end(), span_less);
    CHECK(spans == gold);
  }
}

TEST_CASE("gold annotations and timelines satisfy their invariants") {
  GenConfig cfg;
  cfg.seed = 4;
  cfg.n_patients = 2000;
  const auto c = generate(cfg);
  std::map<std::string, const ReportDoc*> docs;
  for (const auto& d : c.docs) docs[d.report_id] = &d;
  REQUIRE(c.gold.size() == c.docs.size());
  for (const auto& g : c.gold) {
    REQUIRE(docs.count(g.report_id));
    CHECK(validate_annotation(g, *docs[g.report_id]).empty());
  }
  for (const auto& t : c.timelines) CHECK(validate_timeline(t).empty());
}

TEST_CASE("feature presence is calibrated within three binomial SDs") {
  GenConfig cfg;
  cfg.seed = 1;
  cfg.n_patients = 20000;
  const auto c = generate(cfg);
  std::size_t itf = 0, itn = 0;
  std::map<std::string, std::size_t> present;
  for (const auto& t : c.truth) {
    if (t.label == ReportLabel::NoFinding) continue;
    ++itf;
    if (t.label != ReportLabel::ITN) continue;
    ++itn;
    const auto& e = t.expected;
    present["location"] += e.location.has_value();
    present["size"] += e.size.has_value();
    present["recommendation"] += e.recommendation.has_value();
    present["density"] += e.density.has_value();
    present["calcification"] += e.calcified.value_or(false);
    present["attenuation"] += e.attenuation.has_value();
    present["metabolic_activity"] += e.metabolic_activity.has_value();
    present["enhancement"] += e.enhancement.has_value();
  }
  const double prevalence = static_cast<double>(itf) / cfg.n_patients;
  CHECK(std::abs(prevalence - cfg.itf_prevalence) <= 0.006);
  REQUIRE(itn > 0);
  for (const auto& [key, target] : cfg.feature_presence) {
    const double rate = static_cast<double>(present[key]) / itn;
    const double sd = std::sqrt(target * (1 - target) / itn);
    INFO(key << " rate " << rate << " target " << target);
    CHECK(std::abs(rate - target) <= 3 * sd);
  }
}

TEST_CASE("sample_subjects is reproducible") {
  GenConfig cfg;
  cfg.seed = 8;
  cfg.n_patients = 50;
  const auto subjects = sample_subjects(cfg, 50);
  const auto again = sample_subjects(cfg, 50);
  REQUIRE(subjects.size() == 50);
  for (std::size_t i = 0; i < subjects.size(); ++i) {
    CHECK(subjects[i].itf == again[i].itf);
    CHECK(subjects[i].age_years == again[i].age_years);
  }
  CHECK(cell_odds_ratio(Modality::CT, BodyGroup::Chest) == 1.0);
}
