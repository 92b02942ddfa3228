#include <doctest.h>

#include <algorithm>
#include <string>
#include <vector>

#include "itf/corpus.hpp"
#include "itf/detect.hpp"
#include "itf/extract.hpp"
#include "itf/lexicon.hpp"
#include "itf/rng.hpp"
#include "itf/synthgen.hpp"

using namespace itf;

namespace {

ReportDoc doc_of(std::string text, std::string id = "r1") {
  ReportDoc d;
  d.report_id = std::move(id);
  d.patient_id = "p1";
  d.study_date = Date::from_ymd(2021, 5, 1);
  d.text = std::move(text);
  return d;
}

ReportLabel label_of(const std::string& text) {
  static const auto backend = lexicon_backend();
  return classify_report(doc_of(text), *backend).label;
}

FindingResult extract_text(const std::string& text) {
  static const auto backend = lexicon_backend();
  const auto doc = doc_of(text);
  return extract_entities(doc, classify_report(doc, *backend));
}

}  // namespace

TEST_CASE("default lexicon is valid and disjoint") {
  const auto lex = Lexicon::defaults();
  CHECK(lex.validate().empty());
  for (const auto& t : lex.nodular_terms) {
    CHECK(std::find(lex.nonnodular_terms.begin(), lex.nonnodular_terms.end(), t) == lex.nonnodular_terms.end());
  }
  CHECK(std::find(lex.normal_terms.begin(), lex.normal_terms.end(), "unremarkable") != lex.normal_terms.end());
}

TEST_CASE("lexicon JSON round trip and overlap rejection") {
  const auto lex = Lexicon::defaults();
  const auto back = Lexicon::from_json(lex.to_json());
  CHECK(back.nodular_terms == lex.nodular_terms);
  CHECK(back.gate_terms == lex.gate_terms);
  auto bad = lex;
  bad.nonnodular_terms.push_back("nodule");
  CHECK_FALSE(bad.validate().empty());
  CHECK_THROWS(Lexicon::from_json(bad.to_json()));
}

TEST_CASE("classify_report fixtures") {
  CHECK(label_of("The thyroid gland is unremarkable.") == ReportLabel::NoFinding);
  CHECK(label_of("1.2 cm hypodense nodule in the right thyroid lobe.") == ReportLabel::ITN);
  CHECK(label_of("Thyromegaly without discrete nodule.") == ReportLabel::NonNodular);
  CHECK(label_of("The lungs are clear. No pleural effusion.") == ReportLabel::NoFinding);
  CHECK(label_of("Goiter.") == ReportLabel::NonNodular);
  CHECK(label_of("No thyroid nodule identified.") == ReportLabel::NoFinding);
  CHECK(label_of("Thyroid: normal.") == ReportLabel::NoFinding);
  CHECK(label_of("Heterogeneous thyroid with atrophy and a nodule.") == ReportLabel::ITN);
}

TEST_CASE("lexicon backend scores are 0 or 1 and agree with the call") {
  const auto backend = lexicon_backend();
  CHECK(backend->name() == "lexicon");
  for (const char* text : {"Goiter.", "Thyroid: normal.", "Thyroid nodule.", "Lungs clear."}) {
    const auto d = backend->classify(doc_of(text));
    CHECK((d.score == 0.0 || d.score == 1.0));
    CHECK((d.call == Stage1Call::Positive) == (d.score >= backend->threshold()));
  }
  CHECK(backend->classify(doc_of("Goiter.")).call == Stage1Call::Positive);
  CHECK(backend->classify(doc_of("No thyroid nodule identified.")).call == Stage1Call::NoFinding);
}

TEST_CASE("empty text is NoFinding with a flag") {
  const auto backend = lexicon_backend();
  const auto r = classify_report(doc_of(""), *backend);
  CHECK(r.label == ReportLabel::NoFinding);
  CHECK(std::find(r.flags.begin(), r.flags.end(), "empty-text") != r.flags.end());
}

TEST_CASE("negation cue must fall within five tokens") {
  CHECK(label_of("Thyroid without any clear evidence of nodule.") == ReportLabel::NoFinding);
  CHECK(label_of("No acute process in the chest wall or lungs, thyroid nodule noted.") == ReportLabel::ITN);
}

TEST_CASE("classification is deterministic, gate-sound and monotone") {
  const auto backend = lexicon_backend();
  GenConfig cfg;
  cfg.seed = 11;
  cfg.n_patients = 300;
  const auto corpus = generate(cfg);
  const auto lex = Lexicon::defaults();
  for (const auto& d : corpus.docs) {
    const auto a = classify_report(d, *backend);
    const auto b = classify_report(d, *backend);
    CHECK(a.label == b.label);
    CHECK(a.evidence == b.evidence);

    const auto scan = default_scanner().scan(d.text);
    if (!scan.any_context()) CHECK(a.label == ReportLabel::NoFinding);

    if (a.label == ReportLabel::ITN) {
      auto more = d;
      more.text += "\nSmall nodule in the left thyroid lobe.";
      CHECK(classify_report(more, *backend).label == ReportLabel::ITN);
    }
  }
}

TEST_CASE("documents without any gate or standalone term are NoFinding") {
  Rng rng(5);
  const std::vector<std::string> words{"nodule", "mass", "lesion", "cyst", "focus", "enlarged", "liver",
                                       "lung",   "right", "left",   "no",   "with",  "calcified"};
  for (int i = 0; i < 300; ++i) {
    std::string text;
    const auto n = 1 + rng.below(15);
    for (std::uint64_t k = 0; k < n; ++k) {
      text += words[rng.below(words.size())];
      text += rng.bernoulli(0.2) ? ". " : " ";
    }
    CHECK(label_of(text) == ReportLabel::NoFinding);
  }
}

TEST_CASE("parse_size fixtures") {
  CHECK(parse_size("12 mm")->value->tenths() == 12);
  CHECK(parse_size("1.3 x 0.9 cm")->value->tenths() == 13);
  CHECK(parse_size("1.3 × 0.9 cm")->value->tenths() == 13);
  CHECK(parse_size("4.6 cm")->value->tenths() == 46);
  const auto tiny = parse_size("tiny");
  REQUIRE(tiny);
  CHECK_FALSE(tiny->value);
  CHECK(tiny->qualitative == "tiny");
  CHECK_FALSE(parse_size("no measurement here"));
}

TEST_CASE("bin_size fixtures and rounding") {
  CHECK(bin_size(1.0) == SizeBin::UpTo1);
  CHECK(bin_size(1.1) == SizeBin::From1To2);
  CHECK(bin_size(2.0) == SizeBin::From1To2);
  CHECK(bin_size(3.05) == SizeBin::From3To4);
  CHECK(bin_size(4.05) == SizeBin::Over4);
  CHECK(SizeCm::round(4.05).tenths() == 41);
  CHECK(SizeCm::round(0.05).tenths() == 1);
  CHECK_THROWS_AS(bin_size(0.0), std::invalid_argument);
  CHECK_THROWS_AS(bin_size(-1.0), std::invalid_argument);
  CHECK(to_string(SizeBin::From2To3) == "2.1–3.0");
}

TEST_CASE("bin_size partitions the one-decimal grid and agrees with parse_size") {
  const long edges[] = {10, 20, 30, 40};
  for (long t = 1; t <= 80; ++t) {
    const auto s = SizeCm::from_tenths(t);
    const auto bin = bin_size(s);
    const long expected = std::count_if(std::begin(edges), std::end(edges), [&](long e) { return t > e; });
    CHECK(static_cast<long>(bin) == expected);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%ld.%ld cm", t / 10, t % 10);
    const auto parsed = parse_size(buf);
    REQUIRE(parsed);
    REQUIRE(parsed->value);
    CHECK(parsed->value->tenths() == t);
    CHECK(bin_size(*parsed->value) == bin);
    std::snprintf(buf, sizeof buf, "%ld mm", t);
    CHECK(parse_size(buf)->value->tenths() == t);
  }
}

TEST_CASE("infer_bilaterality fixtures") {
  auto loc = [](std::string subtype) {
    return EntitySpan{0, 1, EntityCategory::Location, std::move(subtype), "x"};
  };
  CHECK(infer_bilaterality(std::vector<EntitySpan>{loc("Right")}) == NoduleLocation::Right);
  CHECK(infer_bilaterality(std::vector<EntitySpan>{loc("Right"), loc("Left")}) == NoduleLocation::Bilateral);
  CHECK(infer_bilaterality(std::vector<EntitySpan>{loc("Bilateral")}) == NoduleLocation::Bilateral);
  CHECK(infer_bilaterality(std::vector<EntitySpan>{loc("Isthmus")}) == NoduleLocation::Isthmus);
  CHECK_FALSE(infer_bilaterality(std::vector<EntitySpan>{}));
  CHECK(extract_text("Calcified nodules in both thyroid lobes.").location == NoduleLocation::Bilateral);
}

TEST_CASE("extract_entities fixtures") {
  SUBCASE("size, side, density and ultrasound recommendation") {
    const auto f = extract_text("2.1 cm hypodense nodule in the left thyroid lobe. Nonemergent ultrasound recommended.");
    CHECK(f.label == ReportLabel::ITN);
    CHECK(f.location == NoduleLocation::Left);
    REQUIRE(f.size);
    CHECK(f.size->tenths() == 21);
    CHECK(f.size_bin == SizeBin::From2To3);
    CHECK(f.density == Density::Low);
    CHECK(f.recommendation == RecommendationKind::Ultrasound);
  }
  SUBCASE("bilateral calcified nodules without a size") {
    const auto f = extract_text("Calcified nodules in both thyroid lobes.");
    CHECK(f.label == ReportLabel::ITN);
    CHECK(f.location == NoduleLocation::Bilateral);
    CHECK(f.calcified == true);
    CHECK_FALSE(f.size);
    CHECK_FALSE(f.size_bin);
  }
  SUBCASE("metabolic activity and distribution") {
    const auto f = extract_text("Hypermetabolic focus in the right thyroid nodule, SUV 4.2.");
    CHECK(f.location == NoduleLocation::Right);
    CHECK(f.metabolic_activity == MetabolicActivity::Hypermetabolic);
    CHECK(f.metabolic_distribution == MetabolicDistribution::Focal);
  }
  SUBCASE("largest size wins") {
    const auto f = extract_text("Thyroid nodules measuring 0.8 cm and 14 mm.");
    REQUIRE(f.size);
    CHECK(f.size->tenths() == 14);
  }
  SUBCASE("recommendation precedence") {
    const auto f = extract_text("Right thyroid nodule, biopsy recommended, nonemergent ultrasound recommended.");
    CHECK(f.recommendation == RecommendationKind::Ultrasound);
  }
  SUBCASE("unqualified attenuation") {
    const auto f = extract_text("Thyroid nodule with attenuation.");
    CHECK(f.attenuation == Attenuation::Unspecified);
  }
  SUBCASE("qualitative size never fills the numeric size") {
    const auto f = extract_text("Tiny thyroid nodule.");
    CHECK_FALSE(f.size);
    CHECK(f.qualitative_size == "tiny");
  }
}

TEST_CASE("non-ITN reports carry no nodule attributes") {
  for (const char* text : {"Thyromegaly. 2.1 cm.", "Goiter with calcification, left lobe.", "Lungs clear."}) {
    const auto f = extract_text(text);
    CHECK(f.label != ReportLabel::ITN);
    CHECK_FALSE(f.has_nodule_attributes());
  }
}

TEST_CASE("size_bin is present exactly when size is, over a synthetic corpus") {
  GenConfig cfg;
  cfg.seed = 3;
  cfg.n_patients = 1500;
  const auto corpus = generate(cfg);
  const auto backend = lexicon_backend();
  const auto results = run_pipeline(corpus.docs, *backend, default_scanner(), 1);
  const auto threaded = run_pipeline(corpus.docs, *backend, default_scanner(), 3);
  REQUIRE(results.size() == corpus.docs.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    const auto& f = results[i];
    CHECK(f.report_id == corpus.docs[i].report_id);
    CHECK(finding_line(f) == finding_line(threaded[i]));
    CHECK(f.size.has_value() == f.size_bin.has_value());
    if (f.size) CHECK(bin_size(*f.size) == *f.size_bin);
    if (f.label != ReportLabel::ITN) CHECK_FALSE(f.has_nodule_attributes());
    CHECK(finding_line(parse_finding_line(finding_line(f))) == finding_line(f));
  }
}
