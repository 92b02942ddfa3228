#include "itf/lexicon.hpp"

#include <algorithm>
#include <array>
#include <set>

#include "itf/errors.hpp"
#include "itf/text.hpp"
#include "json.hpp"

namespace itf {
namespace {


// clang-format off
constexpr AttributeTerm kAttributeTerms[] = {
  // Location
  {"right", TermKind::Location, "Right"},
  {"right lobe", TermKind::Location, "Right"},
  {"right thyroid", TermKind::Location, "Right"},
  {"right thyroid lobe", TermKind::Location, "Right"},
  {"right lobe of the thyroid", TermKind::Location, "Right"},
  {"right lobe of the thyroid gland", TermKind::Location, "Right"},
  {"left", TermKind::Location, "Left"},
  {"left lobe", TermKind::Location, "Left"},
  {"left thyroid", TermKind::Location, "Left"},
  {"left thyroid lobe", TermKind::Location, "Left"},
  {"left lobe of the thyroid", TermKind::Location, "Left"},
  {"left lobe of the thyroid gland", TermKind::Location, "Left"},
  {"isthmus", TermKind::Location, "Isthmus"},
  {"bilateral", TermKind::Location, "Bilateral"},
  {"bilaterally", TermKind::Location, "Bilateral"},
  {"both lobes", TermKind::Location, "Bilateral"},
  {"both thyroid lobes", TermKind::Location, "Bilateral"},
  {"both lobes of the thyroid", TermKind::Location, "Bilateral"},
  {"both lobes of the thyroid gland", TermKind::Location, "Bilateral"},
  // Density
  {"hypodense", TermKind::Density, "Low"},
  {"hypodensity", TermKind::Density, "Low"},
  {"low dense", TermKind::Density, "Low"},
  {"low density", TermKind::Density, "Low"},
  {"hyperdense", TermKind::Density, "High"},
  {"high density", TermKind::Density, "High"},
  {"heterogeneous density", TermKind::Density, "Heterogeneous"},
  {"heterogeneously dense", TermKind::Density, "Heterogeneous"},
  // Attenuation
  {"hypoattenuating", TermKind::Attenuation, "Low"},
  {"hypoattenuation", TermKind::Attenuation, "Low"},
  {"low attenuating", TermKind::Attenuation, "Low"},
  {"low attenuation", TermKind::Attenuation, "Low"},
  {"hyperattenuating", TermKind::Attenuation, "High"},
  {"high attenuation", TermKind::Attenuation, "High"},
  {"heterogeneous attenuation", TermKind::Attenuation, "Heterogeneous"},
  {"heterogeneously attenuating", TermKind::Attenuation, "Heterogeneous"},
  {"attenuation", TermKind::Attenuation, "Unspecified"},
  {"attenuating", TermKind::Attenuation, "Unspecified"},
  // Enhancement
  {"hypoenhancing", TermKind::Enhancement, "Low"},
  {"low enhancement", TermKind::Enhancement, "Low"},
  {"hyperenhancing", TermKind::Enhancement, "High"},
  {"high enhancement", TermKind::Enhancement, "High"},
  {"heterogeneous enhancement", TermKind::Enhancement, "Heterogeneous"},
  {"heterogeneously enhancing", TermKind::Enhancement, "Heterogeneous"},
  {"enhancing", TermKind::Enhancement, "Enhancing"},
  {"enhancement", TermKind::Enhancement, "Enhancing"},
  {"normal enhancement", TermKind::Enhancement, "Enhancing"},
  // Metabolic activity
  {"hypermetabolic", TermKind::Metabolic, "Hypermetabolic"},
  {"hypermetabolism", TermKind::Metabolic, "Hypermetabolic"},
  {"increased fdg uptake", TermKind::Metabolic, "Hypermetabolic"},
  {"fdg avid", TermKind::Metabolic, "Hypermetabolic"},
  {"mildly hypermetabolic", TermKind::Metabolic, "LowMetabolic"},
  {"low metabolic activity", TermKind::Metabolic, "LowMetabolic"},
  {"low fdg uptake", TermKind::Metabolic, "LowMetabolic"},
  {"mild fdg uptake", TermKind::Metabolic, "LowMetabolic"},
  {"moderately hypermetabolic", TermKind::Metabolic, "MidMetabolic"},
  {"moderate metabolic activity", TermKind::Metabolic, "MidMetabolic"},
  {"moderate fdg uptake", TermKind::Metabolic, "MidMetabolic"},
  {"nonmetabolic", TermKind::Metabolic, "NonMetabolic"},
  {"non metabolic", TermKind::Metabolic, "NonMetabolic"},
  {"not fdg avid", TermKind::Metabolic, "NonMetabolic"},
  {"physiologic uptake", TermKind::Metabolic, "Physiological"},
  {"physiological uptake", TermKind::Metabolic, "Physiological"},
  {"physiologic fdg uptake", TermKind::Metabolic, "Physiological"},
  {"fdg activity", TermKind::Metabolic, "Ambiguous"},
  {"fdg uptake", TermKind::Metabolic, "Ambiguous"},
  {"suv", TermKind::Metabolic, "Ambiguous"},
  {"metabolic activity", TermKind::Metabolic, "Ambiguous"},
  {"radiotracer uptake", TermKind::Metabolic, "Ambiguous"},
  // Qualitative size
  {"tiny", TermKind::QualitativeSize, "Qualitative"},
  {"small", TermKind::QualitativeSize, "Qualitative"},
  {"large", TermKind::QualitativeSize, "Qualitative"},
  {"massive", TermKind::QualitativeSize, "Qualitative"},
  // Number of findings
  {"single", TermKind::Number, "Single"},
  {"one", TermKind::Number, "Single"},
  {"solitary", TermKind::Number, "Single"},
  {"sole", TermKind::Number, "Single"},
  {"unique", TermKind::Number, "Single"},
  {"multiple", TermKind::Number, "Multiple"},
  {"several", TermKind::Number, "Multiple"},
  {"numerous", TermKind::Number, "Multiple"},
  // Associated findings
  {"tracheal deviation", TermKind::Associated, "TracheaNonInvasion"},
  {"tracheal narrowing", TermKind::Associated, "TracheaNonInvasion"},
  {"narrowing of the upper trachea", TermKind::Associated, "TracheaNonInvasion"},
  {"tracheal invasion", TermKind::Associated, "TracheaInvasion"},
  {"trachea invasion", TermKind::Associated, "TracheaInvasion"},
  {"tracheal erosion", TermKind::Associated, "TracheaInvasion"},
  {"trachea erosion", TermKind::Associated, "TracheaInvasion"},
  {"tracheal wall thickening", TermKind::Associated, "TracheaInvasion"},
  {"tracheal mass", TermKind::Associated, "TracheaInvasion"},
  {"tracheal lesion", TermKind::Associated, "TracheaInvasion"},
  {"tracheal fdg uptake", TermKind::Associated, "TracheaInvasion"},
  {"esophageal narrowing", TermKind::Associated, "EsophagusNonInvasion"},
  {"esophagus deviation", TermKind::Associated, "EsophagusNonInvasion"},
  {"esophageal deviation", TermKind::Associated, "EsophagusNonInvasion"},
  {"esophagus invasion", TermKind::Associated, "EsophagusInvasion"},
  {"esophageal invasion", TermKind::Associated, "EsophagusInvasion"},
  {"esophagus erosion", TermKind::Associated, "EsophagusInvasion"},
  {"esophagus mass", TermKind::Associated, "EsophagusInvasion"},
  {"esophagus wall thickening", TermKind::Associated, "EsophagusInvasion"},
  {"esophagus fdg uptake", TermKind::Associated, "EsophagusInvasion"},
  {"carotid stenosis", TermKind::Associated, "CarotidJugularNonInvasion"},
  {"jugular stenosis", TermKind::Associated, "CarotidJugularNonInvasion"},
  {"invasion of the vessel walls", TermKind::Associated, "CarotidJugularInvasion"},
  {"loss of vascular wall layers", TermKind::Associated, "CarotidJugularInvasion"},
  {"displaced nerve", TermKind::Associated, "NerveNonInvasion"},
  {"vocal cord paralysis", TermKind::Associated, "VocalCordsNonInvasion"},
  {"vocal cord not medialized", TermKind::Associated, "VocalCordsNonInvasion"},
  {"vocal cord mass", TermKind::Associated, "VocalCordsInvasion"},
  {"cricoid cartilage erosion", TermKind::Associated, "CartilageInvasion"},
  {"pathological fracture", TermKind::Associated, "BoneInvasion"},
  {"muscle thickening", TermKind::Associated, "MuscleInvasion"},
  {"substernal extension", TermKind::Associated, "Other"},
  {"extends into the thoracic inlet", TermKind::Associated, "Other"},
  // Radiology classification
  {"benign", TermKind::Classification, "Benign"},
  {"likely benign", TermKind::Classification, "Benign"},
  {"insignificant", TermKind::Classification, "Benign"},
  {"insignificant by size criteria", TermKind::Classification, "Benign"},
  {"malignant", TermKind::Classification, "Malignant"},
  {"likely malignant", TermKind::Classification, "Malignant"},
  {"pathological", TermKind::Classification, "Malignant"},
  {"likely pathological", TermKind::Classification, "Malignant"},
  {"likely cancer", TermKind::Classification, "Malignant"},
  {"suspicious for malignancy", TermKind::Classification, "Malignant"},
  {"indeterminate", TermKind::Classification, "Indeterminate"},
  // Recommendations
  {"ultrasound recommended", TermKind::Recommendation, "Ultrasound"},
  {"nonemergent ultrasound recommended", TermKind::Recommendation, "Ultrasound"},
  {"non emergent ultrasound recommended", TermKind::Recommendation, "Ultrasound"},
  {"thyroid ultrasound recommended", TermKind::Recommendation, "Ultrasound"},
  {"nonemergent thyroid ultrasound recommended", TermKind::Recommendation, "Ultrasound"},
  {"dedicated thyroid ultrasound recommended", TermKind::Recommendation, "Ultrasound"},
  {"consider ultrasound", TermKind::Recommendation, "Ultrasound"},
  {"consider thyroid ultrasound", TermKind::Recommendation, "Ultrasound"},
  {"recommend ultrasound", TermKind::Recommendation, "Ultrasound"},
  {"recommend thyroid ultrasound", TermKind::Recommendation, "Ultrasound"},
  {"ct recommended", TermKind::Recommendation, "NonUltrasoundImaging"},
  {"mri recommended", TermKind::Recommendation, "NonUltrasoundImaging"},
  {"follow up imaging recommended", TermKind::Recommendation, "NonUltrasoundImaging"},
  {"follow up ct recommended", TermKind::Recommendation, "NonUltrasoundImaging"},
  {"imaging follow up recommended", TermKind::Recommendation, "NonUltrasoundImaging"},
  {"nuclear medicine thyroid scan recommended", TermKind::Recommendation, "NonUltrasoundImaging"},
  {"consider ct", TermKind::Recommendation, "NonUltrasoundImaging"},
  {"consider mri", TermKind::Recommendation, "NonUltrasoundImaging"},
  {"biopsy recommended", TermKind::Recommendation, "Other"},
  {"consider biopsy", TermKind::Recommendation, "Other"},
  {"follow up recommended", TermKind::Recommendation, "Other"},
  {"correlation recommended", TermKind::Recommendation, "Other"},
  {"clinical correlation recommended", TermKind::Recommendation, "Other"},
  {"endocrinology referral recommended", TermKind::Recommendation, "Other"},
  {"consider thyroid function tests", TermKind::Recommendation, "Other"},
};
// clang-format on

constexpr std::string_view kCalcification[] = {"calcification", "calcifications", "calcified"};
constexpr std::string_view kNegationCues[] = {"no", "without", "absent", "negative for", "free of"};
constexpr std::string_view kDiffuse[] = {"diffuse", "diffusely"};
constexpr std::string_view kFocal[] = {"focal", "focally", "focus", "foci", "localized"};

std::string normalized(std::string_view phrase) {
  std::string out;
  for (const auto& t : phrase_tokens(phrase)) {
    if (!out.empty()) out.push_back(' ');
    out += t;
  }
  return out;
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_array()) throw ParseError(0, std::string("lexicon: '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw ParseError(0, std::string("lexicon: '") + key + "' must contain strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

Lexicon Lexicon::defaults() {
  Lexicon lx;
  lx.gate_terms = {"thyroid", "thyroid gland"};
  lx.normal_terms = {"normal", "unremarkable"};
  lx.nodular_terms = {"nodule",  "nodules",         "nodularity",          "nodular", "multinodular",
                      "multinodular goiter",        "multinodular enlargement",       "goitrous enlargement",
                      "lesion",  "lesions",         "cyst",                "cysts",   "mass",
                      "masses"};
  lx.nonnodular_terms = {"atrophy",   "atrophic", "foci",           "focus",       "congenitally absent",
                         "remnant",   "enlargement", "enlarged",    "calcification", "calcifications",
                         "calcified", "ectopic tissue", "thyroglossal duct", "thyromegaly"};
  lx.standalone_nonnodular = {"goiter", "thyromegaly"};
  return lx;
}

Lexicon Lexicon::from_json(std::string_view json) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, std::string("lexicon: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(0, "lexicon: expected an object");
  Lexicon lx;
  lx.gate_terms = string_list(j, "gate_terms");
  lx.normal_terms = string_list(j, "normal_terms");
  lx.nodular_terms = string_list(j, "nodular_terms");
  lx.nonnodular_terms = string_list(j, "nonnodular_terms");
  lx.standalone_nonnodular = string_list(j, "standalone_nonnodular");
  if (auto problems = lx.validate(); !problems.empty()) throw ValidationError("lexicon: " + problems.front());
  return lx;
}

std::string Lexicon::to_json() const {
  nlohmann::ordered_json j;
  j["gate_terms"] = gate_terms;
  j["normal_terms"] = normal_terms;
  j["nodular_terms"] = nodular_terms;
  j["nonnodular_terms"] = nonnodular_terms;
  j["standalone_nonnodular"] = standalone_nonnodular;
  return j.dump(2);
}

std::vector<std::string> Lexicon::validate() const {
  std::vector<std::string> problems;
  if (gate_terms.empty()) problems.push_back("gate_terms is empty");
  std::set<std::string> nodular;
  for (const auto& t : nodular_terms) nodular.insert(normalized(t));
  for (const auto& t : nonnodular_terms) {
    if (nodular.count(normalized(t))) problems.push_back("term '" + t + "' is both nodular and non-nodular");
  }
  for (const auto& t : standalone_nonnodular) {
    if (nodular.count(normalized(t))) problems.push_back("standalone term '" + t + "' is nodular");
  }
  auto all = {&gate_terms, &normal_terms, &nodular_terms, &nonnodular_terms, &standalone_nonnodular};
  for (const auto* list : all) {
    for (const auto& t : *list) {
      if (normalized(t).empty()) problems.push_back("term '" + t + "' has no tokens");
    }
  }
  return problems;
}

std::span<const AttributeTerm> attribute_terms() { return kAttributeTerms; }
std::span<const std::string_view> calcification_terms() { return kCalcification; }
std::span<const std::string_view> negation_cues() { return kNegationCues; }
std::span<const std::string_view> diffuse_cues() { return kDiffuse; }
std::span<const std::string_view> focal_cues() { return kFocal; }

}  // namespace itf
