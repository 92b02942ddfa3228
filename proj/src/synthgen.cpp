#include "itf/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>
#include <set>
#include <stdexcept>

#include "itf/csv.hpp"
#include "itf/parallel.hpp"

namespace itf {
namespace {

constexpr std::array<const char*, 8> kFeatureKeys{"location",    "size",        "recommendation",     "density",
                                                   "calcification", "attenuation", "metabolic_activity", "enhancement"};

template <std::size_t N>
std::array<double, N> normalized(std::array<double, N> w) {
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  return w;
}

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

std::size_t cp_length(std::string_view s) {
  return static_cast<std::size_t>(
      std::count_if(s.begin(), s.end(), [](char c) { return (static_cast<unsigned char>(c) & 0xC0) != 0x80; }));
}

template <typename T>
const T& pick(Rng& rng, const std::vector<T>& items) {
  return items[rng.below(items.size())];
}

template <std::size_t N>
std::size_t draw(Rng& rng, const std::array<double, N>& w) {
  return rng.categorical(std::span<const double>(w));
}

// --- report assembly ------------------------------------------------------

/// A run of report text, optionally carrying one gold span over its whole extent.
struct Piece {
  std::string text;
  std::optional<EntityCategory> category;
  std::optional<std::string> subtype;
  bool standalone = false;  // resolved against the whole report at render time
};

using Block = std::vector<Piece>;

void plain(Block& b, std::string text) { b.push_back({std::move(text), std::nullopt, std::nullopt, false}); }

void tag(Block& b, std::string text, EntityCategory cat, std::optional<std::string> subtype = std::nullopt) {
  b.push_back({std::move(text), cat, std::move(subtype), false});
}

/// Template markup: {T:..} thyroid, {N:..} normal finding, {F:..} non-nodular finding,
/// {D:..} nodular finding, {S:..} standalone term.
Block parse_template(std::string_view t) {
  Block b;
  std::size_t i = 0;
  while (i < t.size()) {
    const auto open = t.find('{', i);
    if (open == std::string_view::npos) {
      plain(b, std::string(t.substr(i)));
      break;
    }
    if (open > i) plain(b, std::string(t.substr(i, open - i)));
    const auto close = t.find('}', open);
    const char code = t[open + 1];
    std::string body(t.substr(open + 3, close - open - 3));
    switch (code) {
      case 'T': tag(b, body, EntityCategory::Thyroid); break;
      case 'N': tag(b, body, EntityCategory::NormalFinding); break;
      case 'F': tag(b, body, EntityCategory::TypeOfFinding, std::string(kNonNodularSubtype)); break;
      case 'D': tag(b, body, EntityCategory::TypeOfFinding, std::string(kNodularSubtype)); break;
      case 'S': b.push_back({body, EntityCategory::TypeOfFinding, std::string(kNonNodularSubtype), true}); break;
      default: throw std::logic_error("bad template code");
    }
    i = close + 1;
  }
  return b;
}

void capitalize(Block& b) {
  for (auto& p : b) {
    if (p.text.empty()) continue;
    if (p.text[0] >= 'a' && p.text[0] <= 'z') p.text[0] = static_cast<char>(p.text[0] - 'a' + 'A');
    return;
  }
}

bool names_gate_word(const std::string& text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  for (std::size_t pos = lower.find("thyroid"); pos != std::string::npos; pos = lower.find("thyroid", pos + 1)) {
    const bool left_ok = pos == 0 || !std::isalpha(static_cast<unsigned char>(lower[pos - 1]));
    const std::size_t after = pos + 7;
    const bool right_ok = after >= lower.size() || !std::isalpha(static_cast<unsigned char>(lower[after]));
    if (left_ok && right_ok) return true;
  }
  return false;
}

constexpr const char* kModalityHeader[] = {"CT", "MRI", "NM", "PET", "US"};

const std::vector<std::string>& fillers(BodyGroup g) {
  static const std::vector<std::vector<std::string>> table{
      {"No acute intracranial hemorrhage.", "The ventricles are midline in position.", "Paranasal sinuses are clear.",
       "Mild periventricular white matter changes.", "The orbits are intact.", "Mastoid air cells are clear."},
      {"The airway is patent.", "Cervical lymph nodes are within size limits.", "The salivary glands are symmetric.",
       "Degenerative changes of the cervical spine.", "The carotid arteries are patent.",
       "The visualized lung apices are clear."},
      {"The lungs are clear.", "Pleural spaces are clear.", "Heart size is within limits.",
       "Mediastinal structures are intact.", "Mild bibasilar atelectasis.", "The airways are patent."},
      {"The liver and spleen are within size limits.", "Degenerative changes of the spine.",
       "The bowel gas pattern is nonobstructive.", "The kidneys are symmetric.", "The aorta is of caliber within limits.",
       "The lungs are clear."},
  };
  return table[static_cast<std::size_t>(g)];
}

struct Rendered {
  ReportDoc doc;
  AnnotatedReport gold;
};

Rendered render(const std::string& report_id, const std::string& patient_id, Date date, Modality m, BodyGroup g,
                const Block& thyroid, ReportLabel label, Rng& rng) {
  const auto& pool = fillers(g);
  const std::size_t before = rng.below(3);
  const std::size_t after = 1 + rng.below(2);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);

  Block all;
  plain(all, std::string("EXAM: ") + kModalityHeader[static_cast<std::size_t>(m)] + " " +
                 std::string(to_string(g)) + "\nFINDINGS:");
  std::size_t next = 0;
  for (std::size_t k = 0; k < before; ++k) plain(all, " " + pool[order[next++]]);
  if (!thyroid.empty()) {
    plain(all, " ");
    all.insert(all.end(), thyroid.begin(), thyroid.end());
  }
  for (std::size_t k = 0; k < after; ++k) plain(all, " " + pool[order[next++]]);
  plain(all, "\n");

  Rendered out;
  out.doc.report_id = report_id;
  out.doc.patient_id = patient_id;
  out.doc.study_date = date;
  out.doc.modality = m;
  out.doc.body_group = g;
  for (const auto& p : all) out.doc.text += p.text;
  const bool gate = names_gate_word(out.doc.text);

  out.gold.report_id = report_id;
  out.gold.annotator_id = "synthgen";
  out.gold.report_label = label;
  std::size_t cp = 0;
  bool standalone_seen = false;
  for (const auto& p : all) {
    const std::size_t len = cp_length(p.text);
    if (p.category) {
      EntitySpan s{cp, cp + len, *p.category, p.subtype, p.text};
      if (p.standalone) {
        if (!gate && !standalone_seen) {
          s.category = EntityCategory::Thyroid;
          s.subtype.reset();
        }
        standalone_seen = true;
      }
      out.gold.spans.push_back(std::move(s));
    }
    cp += len;
  }
  std::sort(out.gold.spans.begin(), out.gold.spans.end(), span_less);
  return out;
}

// --- thyroid sentences ----------------------------------------------------

const std::vector<std::string> kNonNodular{
    "The {T:thyroid gland} is diffusely {F:enlarged}.",
    "{F:Atrophic} {T:thyroid gland}.",
    "{T:Thyroid} {F:atrophy} is noted.",
    "Coarse {F:calcification} in the {T:thyroid gland}.",
    "{F:Thyroglossal duct} {F:remnant} anterior to the {T:thyroid}.",
    "{S:Thyromegaly}.",
    "{S:Goiter} is present.",
    "{F:Ectopic tissue} adjacent to the {T:thyroid gland}.",
    "Punctate {F:foci} of {F:calcification} in the {T:thyroid}.",
};
const std::string kNonNodularNegated = "{S:Thyromegaly} without discrete nodule.";

const std::vector<std::string> kNegation{
    "The {T:thyroid gland} is {N:normal} in size without nodules.",
    "{N:Unremarkable} {T:thyroid} without nodule or mass.",
    "The {T:thyroid} is {N:unremarkable}, with no nodule or cyst.",
    "{N:Normal} {T:thyroid gland}, negative for nodules.",
    "{T:Thyroid}: {N:normal}, free of nodules or calcification.",
};
// The nodule sits outside the negation window.
const std::string kNegationHard =
    "No evidence of a suspicious or dominant nodule in the {T:thyroid gland}, which is {N:normal}.";
constexpr double kNegationHardShare = 0.03;

const std::vector<std::string> kDistractor{
    "The {T:thyroid gland} is {N:unremarkable}.", "{T:Thyroid}: {N:normal}.", "{N:Normal} {T:thyroid}.",
    "The {T:thyroid} appears {N:normal}.",        "{N:Unremarkable} {T:thyroid gland}.",
};
// An extrathyroidal nodule shares the sentence with the thyroid mention.
const std::string kDistractorHard = "{N:Unremarkable} {T:thyroid}, with a tiny nodule in the right lung apex.";
constexpr double kDistractorHardShare = 0.02;

struct Phrase {
  std::string text;
  std::string subtype;
};

// Rates among reports carrying the attribute.
constexpr std::array<double, 4> kLocationRates{0.382, 0.346, 0.27, 0.001};                 // NoduleLocation order
constexpr std::array<double, 3> kDensityRates{0.929, 0.031, 0.024};                       // Low, Het, High
constexpr std::array<double, 4> kEnhancementRates{0.003, 0.006, 0.05, 0.941};              // Low, High, Het, Enh
constexpr std::array<double, 4> kAttenuationRates{0.908, 0.051, 0.014, 0.037};            // Low, Het, High, Unsp
constexpr std::array<double, 6> kMetabolicRates{0.392, 0.073, 0.013, 0.041, 0.012, 0.469};  // MetabolicActivity order
constexpr std::array<double, 3> kDistributionRates{0.191, 0.141, 0.668};                  // Diffuse, Focal, none
constexpr std::array<double, 3> kRecommendationRates{0.705, 0.10, 0.195};                 // RecommendationKind order

constexpr double kSingleRate = 0.12;
constexpr double kMultipleRate = 0.15;
constexpr double kQualitativeRate = 0.06;
constexpr double kClassificationRate = 0.05;
constexpr double kAssociatedRate = 0.02;
constexpr double kPrefixRate = 0.15;

// Adjective and noun-phrase forms per subtype, indexed by enum order; empty = no such form.
const std::vector<std::vector<std::string>> kDensityAdj{{"hypodense"}, {"heterogeneously dense"}, {"hyperdense"}};
const std::vector<std::vector<std::string>> kDensityTail{{"low density"}, {"heterogeneous density"}, {"high density"}};
const std::vector<std::vector<std::string>> kEnhancementAdj{
    {"hypoenhancing"}, {"hyperenhancing"}, {"heterogeneously enhancing"}, {"enhancing"}};
const std::vector<std::vector<std::string>> kEnhancementTail{
    {"low enhancement"}, {"high enhancement"}, {"heterogeneous enhancement"}, {"enhancement"}};
const std::vector<std::vector<std::string>> kAttenuationAdj{
    {"hypoattenuating", "low attenuating"}, {"heterogeneously attenuating"}, {"hyperattenuating"}, {}};
const std::vector<std::vector<std::string>> kAttenuationTail{
    {"low attenuation"}, {"heterogeneous attenuation"}, {"high attenuation"}, {"soft tissue\x1f" "attenuation"}};
const std::vector<std::vector<std::string>> kMetabolicAdj{
    {"hypermetabolic"}, {"mildly hypermetabolic"}, {"moderately hypermetabolic"}, {"nonmetabolic"}, {}, {}};
const std::vector<std::vector<std::string>> kMetabolicTail{
    {"increased FDG uptake", "FDG avid"},
    {"low FDG uptake", "mild FDG uptake", "low metabolic activity"},
    {"moderate FDG uptake", "moderate metabolic activity"},
    {},
    {"physiologic uptake", "physiologic FDG uptake", "physiological uptake"},
    {"FDG uptake", "metabolic activity", "radiotracer uptake", "FDG activity"}};

const std::vector<std::vector<std::string>> kRecommendations{
    {"ultrasound recommended", "nonemergent ultrasound recommended", "thyroid ultrasound recommended",
     "nonemergent thyroid ultrasound recommended", "dedicated thyroid ultrasound recommended", "consider ultrasound",
     "consider thyroid ultrasound", "recommend thyroid ultrasound"},
    {"CT recommended", "MRI recommended", "follow-up imaging recommended", "follow-up CT recommended",
     "nuclear medicine thyroid scan recommended", "consider MRI"},
    {"biopsy recommended", "consider biopsy", "follow-up recommended", "clinical correlation recommended",
     "endocrinology referral recommended", "consider thyroid function tests"}};

const std::vector<Phrase> kAssociated{{"tracheal deviation", "TracheaNonInvasion"},
                                      {"substernal extension", "Other"},
                                      {"esophageal deviation", "EsophagusNonInvasion"}};

struct Noun {
  std::string singular;
  std::string plural;
};
const std::vector<Noun> kNouns{{"nodule", "nodules"}, {"lesion", "lesions"}, {"cyst", "cysts"}, {"mass", "masses"}};
constexpr std::array<double, 4> kNounRates{0.7, 0.12, 0.08, 0.10};

std::string tenths_text(long tenths) {
  if (tenths % 10 == 0 && tenths >= 10) return std::to_string(tenths / 10);
  return std::to_string(tenths / 10) + "." + std::to_string(tenths % 10);
}

/// Numeric size text whose largest dimension equals `tenths`.
std::string size_text(long tenths, Rng& rng) {
  const bool mm = rng.bernoulli(0.3);
  const std::size_t dims = 1 + static_cast<std::size_t>(draw(rng, std::array<double, 3>{0.5, 0.35, 0.15}));
  std::vector<long> values{tenths};
  for (std::size_t d = 1; d < dims; ++d) values.push_back(rng.between(1, tenths));
  if (dims > 1) std::swap(values[0], values[rng.below(dims)]);
  const std::string joiner = dims > 1 && rng.bernoulli(0.2) ? " by " : (rng.bernoulli(0.5) ? " x " : " × ");
  std::string out;
  for (std::size_t d = 0; d < dims; ++d) {
    if (d) out += joiner;
    out += mm ? std::to_string(values[d]) : tenths_text(values[d]);
  }
  return out + (mm ? " mm" : " cm");
}

bool starts_with_vowel_sound(const std::string& s) {
  if (s.empty()) return false;
  const char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[0])));
  if (std::string_view("aeiou").find(c) != std::string_view::npos) return true;
  return c == '8' || s.rfind("11", 0) == 0 || s.rfind("18", 0) == 0;
}

struct Attr {
  std::string text;
  EntityCategory category;
  std::string subtype;
};

/// One ITN sentence (plus an optional recommendation sentence) and the findings it encodes.
Block itn_block(const GenConfig& c, Rng& rng, bool metabolic_eligible, double metabolic_rate,
                const SizeSampler& sizes, FindingResult& exp) {
  const auto& fp = c.feature_presence;
  exp.label = ReportLabel::ITN;

  std::optional<NoduleLocation> loc;
  if (rng.bernoulli(fp.at("location"))) loc = static_cast<NoduleLocation>(draw(rng, kLocationRates));
  std::optional<long> size;
  if (rng.bernoulli(fp.at("size"))) size = SizeCm::round(sizes(rng)).tenths();
  std::optional<RecommendationKind> rec;
  if (rng.bernoulli(fp.at("recommendation"))) rec = static_cast<RecommendationKind>(draw(rng, kRecommendationRates));
  std::optional<Density> density;
  if (rng.bernoulli(fp.at("density"))) density = static_cast<Density>(draw(rng, kDensityRates));
  const bool calcified = rng.bernoulli(fp.at("calcification"));
  std::optional<Attenuation> atten;
  if (rng.bernoulli(fp.at("attenuation"))) atten = static_cast<Attenuation>(draw(rng, kAttenuationRates));
  std::optional<Enhancement> enh;
  if (rng.bernoulli(fp.at("enhancement"))) enh = static_cast<Enhancement>(draw(rng, kEnhancementRates));
  std::optional<MetabolicActivity> metab;
  std::optional<MetabolicDistribution> dist;
  if (metabolic_eligible && rng.bernoulli(metabolic_rate)) {
    metab = static_cast<MetabolicActivity>(draw(rng, kMetabolicRates));
    dist = static_cast<MetabolicDistribution>(draw(rng, kDistributionRates));
  }
  const double u_number = rng.uniform();
  const bool single = u_number < kSingleRate;
  const bool multiple = !single && u_number < kSingleRate + kMultipleRate;
  std::optional<std::string> qualitative;
  if (rng.bernoulli(kQualitativeRate)) qualitative = pick(rng, std::vector<std::string>{"tiny", "small", "large", "massive"});
  const bool classification = rng.bernoulli(kClassificationRate);
  const Phrase* associated = rng.bernoulli(kAssociatedRate) ? &pick(rng, kAssociated) : nullptr;
  const Noun& noun = kNouns[draw(rng, kNounRates)];

  // Location style: 0..3 phrase variants; the bilateral adjective form and the "Thyroid:" prefix
  // change the sentence opening.
  const std::size_t loc_style = rng.below(4);
  const bool bilateral_adjective = loc == NoduleLocation::Bilateral && loc_style == 2;
  const bool prefix = !bilateral_adjective && rng.bernoulli(kPrefixRate);
  const bool plural = multiple || loc == NoduleLocation::Bilateral;

  // Every adjective-capable feature picks a form; forms without an entry fall back.
  std::vector<Attr> adjectives;
  std::vector<Attr> tails;
  auto place = [&](const std::vector<std::vector<std::string>>& adj, const std::vector<std::vector<std::string>>& tail,
                   std::size_t idx, EntityCategory cat, const std::string& subtype, const std::string& cue_adj,
                   const std::string& cue_tail) {
    const bool can_adj = !adj[idx].empty();
    const bool can_tail = !tail[idx].empty();
    const bool as_adj = can_adj && (!can_tail || rng.bernoulli(0.5));
    const auto& text = as_adj ? pick(rng, adj[idx]) : pick(rng, tail[idx]);
    (as_adj ? adjectives : tails).push_back({text, cat, subtype});
    if (!cue_adj.empty()) {
      // The distribution cue is a plain word placed right before the term.
      auto& list = as_adj ? adjectives : tails;
      list.back().text = (as_adj ? cue_adj : cue_tail) + "\x1f" + list.back().text;
    }
  };
  const auto rc = EntityCategory::RadiologicalCharacteristic;
  if (metab) {
    std::string cue_adj, cue_tail;
    if (dist == MetabolicDistribution::Diffuse) {
      cue_adj = "diffusely";
      cue_tail = "diffuse";
    } else if (dist == MetabolicDistribution::Focal) {
      cue_adj = "focally";
      cue_tail = "focal";
    }
    place(kMetabolicAdj, kMetabolicTail, static_cast<std::size_t>(*metab), rc,
          "Metabolic:" + std::string(to_string(*metab)), cue_adj, cue_tail);
  }
  if (density) {
    place(kDensityAdj, kDensityTail, static_cast<std::size_t>(*density), rc,
          "Density:" + std::string(to_string(*density)), "", "");
  }
  if (atten) {
    place(kAttenuationAdj, kAttenuationTail, static_cast<std::size_t>(*atten), rc,
          "Attenuation:" + std::string(to_string(*atten)), "", "");
  }
  if (enh) {
    place(kEnhancementAdj, kEnhancementTail, static_cast<std::size_t>(*enh), rc,
          "Enhancement:" + std::string(to_string(*enh)), "", "");
  }
  if (calcified) {
    if (rng.bernoulli(0.5)) {
      adjectives.push_back({"calcified", rc, "Calcification"});
    } else {
      tails.push_back({rng.bernoulli(0.5) ? "calcifications" : "calcification", rc, "Calcification"});
    }
  }

  Block b;
  auto add_attr = [&](const Attr& a) {
    const auto sep = a.text.find('\x1f');
    if (sep != std::string::npos) {
      plain(b, a.text.substr(0, sep) + " ");
      tag(b, a.text.substr(sep + 1), a.category, a.subtype);
    } else {
      tag(b, a.text, a.category, a.subtype);
    }
  };
  auto location = [&](NoduleLocation l) { return std::string(to_string(l)); };

  // Size placement: a numeric prefix only for singular nouns.
  const bool size_prefix = size && !plural && !bilateral_adjective && rng.bernoulli(0.5);

  if (prefix) {
    tag(b, "Thyroid", EntityCategory::Thyroid);
    plain(b, ": ");
  }
  if (bilateral_adjective) {
    tag(b, "bilateral", EntityCategory::Location, "Bilateral");
    plain(b, " ");
  } else if (single) {
    plain(b, "a ");
    tag(b, rng.bernoulli(0.5) ? "single" : "solitary", EntityCategory::NumberOfFindings, "Single");
    plain(b, " ");
  } else if (multiple) {
    tag(b, pick(rng, std::vector<std::string>{"multiple", "several", "numerous"}), EntityCategory::NumberOfFindings,
        "Multiple");
    plain(b, " ");
  } else if (!plural && !prefix) {
    plain(b, "a ");  // article fixed up below
  }
  const std::size_t article_at = b.size() - 1;
  const bool has_article = !prefix && !plural && !single && !b.empty() && b.back().text == "a ";

  if (qualitative) {
    tag(b, *qualitative, EntityCategory::Size, "Qualitative");
    plain(b, " ");
  }
  if (size_prefix) {
    tag(b, size_text(*size, rng), EntityCategory::Size, "Numeric");
    plain(b, " ");
  }
  for (const auto& a : adjectives) {
    add_attr(a);
    plain(b, " ");
  }
  if (bilateral_adjective) {
    tag(b, "thyroid", EntityCategory::Thyroid);
    plain(b, " ");
  }
  tag(b, plural ? noun.plural : noun.singular, EntityCategory::TypeOfFinding, std::string(kNodularSubtype));
  if (has_article) {
    // "a" -> "an" before a vowel sound.
    const auto& next = b[article_at + 1].text;
    if (starts_with_vowel_sound(next)) b[article_at].text = "an ";
  }

  // Location phrase.
  if (!bilateral_adjective) {
    if (prefix) {
      if (loc) {
        switch (*loc) {
          case NoduleLocation::Right:
          case NoduleLocation::Left:
            plain(b, " in the ");
            tag(b, *loc == NoduleLocation::Right ? "right lobe" : "left lobe", EntityCategory::Location, location(*loc));
            break;
          case NoduleLocation::Isthmus:
            plain(b, " in the ");
            tag(b, "isthmus", EntityCategory::Location, "Isthmus");
            break;
          case NoduleLocation::Bilateral:
            plain(b, " in ");
            tag(b, "both lobes", EntityCategory::Location, "Bilateral");
            break;
        }
      }
    } else if (!loc) {
      plain(b, " in the ");
      tag(b, rng.bernoulli(0.5) ? "thyroid gland" : "thyroid", EntityCategory::Thyroid);
    } else {
      const std::string side = *loc == NoduleLocation::Right ? "right" : "left";
      switch (*loc) {
        case NoduleLocation::Right:
        case NoduleLocation::Left: {
          const std::size_t v = loc_style % 3;
          if (v == 0) {
            plain(b, " in the ");
            tag(b, side + " thyroid lobe", EntityCategory::Location, location(*loc));
          } else if (v == 1) {
            plain(b, " in the ");
            tag(b, side + " lobe of the thyroid gland", EntityCategory::Location, location(*loc));
          } else {
            plain(b, " within the ");
            tag(b, side + " thyroid", EntityCategory::Location, location(*loc));
          }
          break;
        }
        case NoduleLocation::Isthmus:
          if (loc_style % 2 == 0) {
            plain(b, " in the ");
            tag(b, "thyroid", EntityCategory::Thyroid);
            plain(b, " ");
            tag(b, "isthmus", EntityCategory::Location, "Isthmus");
          } else {
            plain(b, " in the ");
            tag(b, "isthmus", EntityCategory::Location, "Isthmus");
            plain(b, " of the ");
            tag(b, "thyroid gland", EntityCategory::Thyroid);
          }
          break;
        case NoduleLocation::Bilateral:
          if (loc_style == 0) {
            plain(b, " in ");
            tag(b, "both thyroid lobes", EntityCategory::Location, "Bilateral");
          } else if (loc_style == 1) {
            plain(b, " in ");
            tag(b, "both lobes of the thyroid gland", EntityCategory::Location, "Bilateral");
          } else {
            plain(b, " in the ");
            tag(b, "right", EntityCategory::Location, "Right");
            plain(b, " and ");
            tag(b, "left thyroid", EntityCategory::Location, "Left");
            plain(b, " lobes");
          }
          break;
      }
    }
  }

  if (size && !size_prefix) {
    plain(b, plural ? ", the largest measuring " : " measuring ");
    tag(b, size_text(*size, rng), EntityCategory::Size, "Numeric");
  }
  if (!tails.empty()) {
    plain(b, size && !size_prefix ? ", with " : " with ");
    for (std::size_t k = 0; k < tails.size(); ++k) {
      if (k) plain(b, k + 1 == tails.size() ? " and " : ", ");
      add_attr(tails[k]);
    }
  }
  if (associated) {
    plain(b, ", causing ");
    tag(b, associated->text, EntityCategory::AssociatedFinding, associated->subtype);
  }
  if (classification) {
    plain(b, ", ");
    tag(b, "likely benign", EntityCategory::RadiologyClassification, "Benign");
  }
  plain(b, ".");
  capitalize(b);

  if (rec) {
    Block r;
    tag(r, pick(rng, kRecommendations[static_cast<std::size_t>(*rec)]), EntityCategory::Recommendation,
        std::string(to_string(*rec)));
    plain(r, ".");
    capitalize(r);
    plain(b, " ");
    b.insert(b.end(), r.begin(), r.end());
  }

  exp.location = loc;
  if (size) {
    exp.size = SizeCm::from_tenths(*size);
    exp.size_bin = bin_size(*exp.size);
  }
  exp.qualitative_size = qualitative;
  exp.density = density;
  exp.enhancement = enh;
  if (calcified) exp.calcified = true;
  exp.attenuation = atten;
  exp.metabolic_activity = metab;
  exp.metabolic_distribution = dist;
  exp.recommendation = rec;
  return b;
}

// --- timelines ------------------------------------------------------------

struct DemographicField {
  const char* key;
  double observed;  // share of patients with the field recorded
  std::vector<std::string> levels;
  std::vector<double> weights;
};

const std::vector<DemographicField>& demographic_fields() {
  constexpr double n = 115683.0;
  static const std::vector<DemographicField> fields{
      {"race", 113814 / n, {"Black", "Asian", "White", "Other"}, {5025, 2853, 103559, 2377}},
      {"ethnicity", 113177 / n, {"Hispanic", "Not Hispanic"}, {6217, 106960}},
      {"language", 115582 / n, {"Non-English", "English"}, {3021, 112561}},
      {"marital", 115122 / n,
       {"Married/Life Partner", "Divorced/Separated", "Widowed", "Single"},
       {73933, 9927, 7892, 23370}},
      {"education", 86300 / n,
       {"No high school degree", "Highschool Degree/GED", "Some college/associate degree", "Bachelor's degree",
        "Post-Graduate Degree"},
       {2527, 32231, 14589, 20374, 16579}},
      {"employment", 83250 / n, {"Disabled", "Employed", "Retired", "Unemployed"}, {5520, 36602, 34267, 6861}},
      {"payor", 115653 / n,
       {"Private", "Medicare", "Medicaid", "Other Govt Programs", "Self-Pay"},
       {59612, 42269, 9331, 2429, 2042}},
      {"financial_risk", 75575 / n, {"Not hard", "Somewhat hard", "Hard/Very Hard"}, {63522, 8354, 3699}},
  };
  return fields;
}

struct CharlsonSource {
  double rate;
  CodeSystem system;
  const char* code;
};

// Baseline comorbidity prevalence, one representative code per condition.
constexpr CharlsonSource kCharlsonSources[] = {
    {0.001, CodeSystem::ICD10, "B20"},    {0.012, CodeSystem::ICD10, "I63.9"},  {0.026, CodeSystem::ICD10, "I50.9"},
    {0.061, CodeSystem::ICD10, "J44.9"},  {0.008, CodeSystem::ICD10, "G30.9"},  {0.068, CodeSystem::ICD10, "E11.9"},
    {0.028, CodeSystem::ICD10, "E11.22"}, {0.002, CodeSystem::ICD10, "G81.90"}, {0.007, CodeSystem::ICD10, "K72.90"},
    {0.012, CodeSystem::ICD10, "C78.00"}, {0.025, CodeSystem::ICD10, "K74.60"}, {0.093, CodeSystem::ICD10, "C34.90"},
    {0.028, CodeSystem::ICD10, "I70.0"},  {0.051, CodeSystem::ICD10, "N18.3"},  {0.017, CodeSystem::ICD10, "M06.9"},
    {0.003, CodeSystem::ICD10, "K25.9"},
};

struct ExclusionSource {
  CodeSystem system;
  const char* code;
};
constexpr ExclusionSource kPriorHistory[] = {{CodeSystem::ICD10, "E04.1"},  {CodeSystem::ICD10, "E05.00"},
                                             {CodeSystem::ICD10, "C73"},    {CodeSystem::CPT, "60100"},
                                             {CodeSystem::CPT, "60240"},    {CodeSystem::CPT, "60220"},
                                             {CodeSystem::ICD9, "241.0"}};

std::pair<CodeSystem, std::string> imaging_code(Modality m, BodyGroup g, Rng& rng) {
  using V = std::vector<std::string>;
  switch (m) {
    case Modality::CT:
      switch (g) {
        case BodyGroup::Head: return {CodeSystem::CPT, pick(rng, V{"70480", "70486"})};
        case BodyGroup::Neck: return {CodeSystem::CPT, pick(rng, V{"70490", "70491", "70492", "70498", "72125"})};
        case BodyGroup::Chest: return {CodeSystem::CPT, pick(rng, V{"71250", "71260", "71270", "71275"})};
        case BodyGroup::Mixed: return {CodeSystem::CPT, "71260"};
      }
      break;
    case Modality::MRI:
      switch (g) {
        case BodyGroup::Head: return {CodeSystem::CPT, pick(rng, V{"70540", "70542", "70543"})};
        case BodyGroup::Neck: return {CodeSystem::CPT, pick(rng, V{"72141", "72156", "70547"})};
        case BodyGroup::Chest: return {CodeSystem::CPT, pick(rng, V{"71550", "71551", "71552"})};
        case BodyGroup::Mixed: return {CodeSystem::CPT, "70549"};
      }
      break;
    case Modality::NuclearMedicine: return {CodeSystem::CPT, pick(rng, V{"78070", "78452", "93017", "78804"})};
    case Modality::PET:
      if (rng.bernoulli(0.1)) return {CodeSystem::HCPCS, "G0230"};
      return {CodeSystem::CPT, pick(rng, V{"78811", "78812", "78813", "78814", "78815", "78816"})};
    case Modality::Ultrasound: return {CodeSystem::CPT, "93880"};
  }
  return {CodeSystem::CPT, "71260"};
}

const Date kIndexFirst = Date::from_ymd(2018, 7, 1);
const Date kIndexLast = Date::from_ymd(2023, 3, 31);

Date birth_for_age(Date index, int age, Rng& rng) {
  const auto ymd = index.ymd();
  const int y = static_cast<int>(ymd.year()) - age;
  unsigned m = static_cast<unsigned>(ymd.month());
  unsigned d = static_cast<unsigned>(ymd.day());
  if (m == 2 && d == 29) d = 28;
  const Date anniversary = Date::from_ymd(y, m, d);
  const Date birth = anniversary - static_cast<long>(rng.below(365));
  return age_in_years(birth, index) == age ? birth : anniversary;
}

struct TimelineBuilder {
  PatientTimeline t;
  void add(Date d, CodeSystem s, std::string code, std::optional<std::string> accession = std::nullopt) {
    t.events.push_back({t.patient_id, d, s, std::move(code), std::move(accession)});
  }
};

void add_outcomes(TimelineBuilder& tb, Date index, const OutcomeRates& rates, Rng& rng, OutcomeTruth& truth) {
  if (!rng.bernoulli(rates.ultrasound)) {
    // A late ultrasound falls outside the follow-up window.
    if (rng.bernoulli(0.01)) {
      const Date late = index + rng.between(181, 365);
      tb.add(late, CodeSystem::CPT, "76536");
      if (rng.bernoulli(0.5)) tb.add(late + rng.between(1, 60), CodeSystem::CPT, "60100");
    }
    return;
  }
  truth.ultrasound = true;
  const Date us = index + rng.between(1, 180);
  tb.add(us, CodeSystem::CPT, "76536");
  truth.nodule_dx = rng.bernoulli(rates.nodule_dx);
  truth.biopsy = rng.bernoulli(rates.biopsy);
  truth.partial_thyroidectomy = rng.bernoulli(rates.partial_thyroidectomy);
  truth.total_thyroidectomy = rng.bernoulli(rates.total_thyroidectomy);
  truth.cancer = rng.bernoulli(rates.cancer);
  if (truth.nodule_dx) tb.add(us + rng.between(1, 180), CodeSystem::ICD10, "E04.1");
  if (truth.biopsy) {
    tb.add(us + rng.between(1, 180), CodeSystem::CPT, "60100");
  } else if (rng.bernoulli(0.01)) {
    tb.add(us + rng.between(181, 300), CodeSystem::CPT, "60100");
  }
  std::optional<Date> last_surgery;
  auto surgery = [&](const char* code) {
    const Date d = us + rng.between(1, 170);
    tb.add(d, CodeSystem::CPT, code);
    if (!last_surgery || d > *last_surgery) last_surgery = d;
  };
  if (truth.partial_thyroidectomy) surgery("60220");
  if (truth.total_thyroidectomy) surgery("60240");
  const Date window_end = us + 180;
  if (truth.cancer) {
    if (last_surgery) {
      tb.add(*last_surgery + rng.between(1, window_end - *last_surgery), CodeSystem::ICD10, "C73");
    } else {
      std::set<long> offsets;
      while (offsets.size() < 3) offsets.insert(rng.between(1, 180));
      for (long o : offsets) tb.add(us + o, CodeSystem::ICD10, "C73");
    }
  } else if (!last_surgery && rng.bernoulli(0.02)) {
    // One or two dated codes do not confirm a cancer.
    std::set<long> offsets;
    const std::size_t k = 1 + rng.below(2);
    while (offsets.size() < k) offsets.insert(rng.between(1, 180));
    for (long o : offsets) tb.add(us + o, CodeSystem::ICD10, "C73");
  }
}

}  // namespace

// --- config ---------------------------------------------------------------

std::map<std::string, double> GenConfig::default_feature_presence() {
  return {{"location", 0.772},      {"size", 0.438},        {"recommendation", 0.267},     {"density", 0.140},
          {"calcification", 0.143}, {"attenuation", 0.111}, {"metabolic_activity", 0.089}, {"enhancement", 0.038}};
}

std::array<double, 5> GenConfig::default_modality_mix() {
  return normalized(std::array<double, 5>{73242, 25438, 2742, 8314, 6847});
}

std::array<double, 4> GenConfig::default_body_mix() {
  return normalized(std::array<double, 4>{17183, 17926, 51973, 28601});
}

namespace {

void check_probability(const std::string& name, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(name + " must be a probability in [0,1]");
}

template <std::size_t N>
void check_mix(const std::string& name, const std::array<double, N>& w) {
  double total = 0.0;
  for (double x : w) {
    check_probability(name, x);
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(name + " must sum to 1");
}

void check_rates(const std::string& prefix, const OutcomeRates& r) {
  check_probability(prefix + ".ultrasound", r.ultrasound);
  check_probability(prefix + ".nodule_dx", r.nodule_dx);
  check_probability(prefix + ".biopsy", r.biopsy);
  check_probability(prefix + ".partial_thyroidectomy", r.partial_thyroidectomy);
  check_probability(prefix + ".total_thyroidectomy", r.total_thyroidectomy);
  check_probability(prefix + ".cancer", r.cancer);
}

}  // namespace

void GenConfig::validate() const {
  check_probability("itf_prevalence", itf_prevalence);
  check_probability("itn_share", itn_share);
  for (const auto* key : kFeatureKeys) {
    auto it = feature_presence.find(key);
    if (it == feature_presence.end()) throw std::invalid_argument(std::string("feature_presence.") + key + " missing");
    check_probability(std::string("feature_presence.") + key, it->second);
  }
  if (feature_presence.size() != kFeatureKeys.size()) throw std::invalid_argument("feature_presence has unknown keys");
  if (!(size_mean_cm > SizeSampler::kLow && size_mean_cm < SizeSampler::kHigh)) {
    throw std::invalid_argument("size_mean_cm must lie inside (0.1, 8.0)");
  }
  if (!(size_sd_cm > 0.0) || !std::isfinite(size_sd_cm)) throw std::invalid_argument("size_sd_cm must be positive");
  check_mix("modality_mix", modality_mix);
  check_mix("body_mix", body_mix);
  check_probability("negation_rate", negation_rate);
  check_probability("distractor_rate", distractor_rate);
  check_probability("duplicate_rate", duplicate_rate);
  check_probability("minor_rate", minor_rate);
  check_probability("short_lookback_rate", short_lookback_rate);
  check_probability("prior_history_rate", prior_history_rate);
  check_probability("bmi_missing_rate", bmi_missing_rate);
  if (minor_rate + short_lookback_rate + prior_history_rate > 1.0) {
    throw std::invalid_argument("minor_rate + short_lookback_rate + prior_history_rate exceeds 1");
  }
  check_rates("itf_outcomes", itf_outcomes);
  check_rates("non_itf_outcomes", non_itf_outcomes);
}

namespace {

std::vector<std::pair<std::string, double*>> numeric_fields(GenConfig& c) {
  std::vector<std::pair<std::string, double*>> out{{"itf_prevalence", &c.itf_prevalence}, {"itn_share", &c.itn_share}};
  for (const auto* key : kFeatureKeys) out.emplace_back(std::string("feature_presence.") + key, &c.feature_presence[key]);
  out.emplace_back("size_mean_cm", &c.size_mean_cm);
  out.emplace_back("size_sd_cm", &c.size_sd_cm);
  for (std::size_t i = 0; i < c.modality_mix.size(); ++i) {
    out.emplace_back("modality_mix." + std::string(to_string(static_cast<Modality>(i))), &c.modality_mix[i]);
  }
  for (std::size_t i = 0; i < c.body_mix.size(); ++i) {
    out.emplace_back("body_mix." + std::string(to_string(static_cast<BodyGroup>(i))), &c.body_mix[i]);
  }
  out.emplace_back("negation_rate", &c.negation_rate);
  out.emplace_back("distractor_rate", &c.distractor_rate);
  out.emplace_back("duplicate_rate", &c.duplicate_rate);
  out.emplace_back("minor_rate", &c.minor_rate);
  out.emplace_back("short_lookback_rate", &c.short_lookback_rate);
  out.emplace_back("prior_history_rate", &c.prior_history_rate);
  out.emplace_back("bmi_missing_rate", &c.bmi_missing_rate);
  for (auto [name, r] : {std::pair<const char*, OutcomeRates*>{"itf_outcomes", &c.itf_outcomes},
                         std::pair<const char*, OutcomeRates*>{"non_itf_outcomes", &c.non_itf_outcomes}}) {
    const std::string p = std::string(name) + ".";
    out.emplace_back(p + "ultrasound", &r->ultrasound);
    out.emplace_back(p + "nodule_dx", &r->nodule_dx);
    out.emplace_back(p + "biopsy", &r->biopsy);
    out.emplace_back(p + "partial_thyroidectomy", &r->partial_thyroidectomy);
    out.emplace_back(p + "total_thyroidectomy", &r->total_thyroidectomy);
    out.emplace_back(p + "cancer", &r->cancer);
  }
  return out;
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_items(const GenConfig& config) {
  GenConfig copy = config;
  std::vector<std::pair<std::string, std::string>> out{{"seed", std::to_string(config.seed)},
                                                       {"n_patients", std::to_string(config.n_patients)}};
  for (const auto& [key, ptr] : numeric_fields(copy)) out.emplace_back(key, format_number(*ptr));
  return out;
}

void set_config_value(GenConfig& config, const std::string& key, const std::string& value) {
  auto parse_unsigned = [&](const std::string& v) -> std::uint64_t {
    std::size_t used = 0;
    unsigned long long x = 0;
    try {
      if (v.empty() || v[0] == '-') throw std::invalid_argument("");
      x = std::stoull(v, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("config " + key + ": expected a non-negative integer, got '" + v + "'");
    }
    if (used != v.size()) throw std::invalid_argument("config " + key + ": expected a non-negative integer, got '" + v + "'");
    return x;
  };
  if (key == "seed") {
    config.seed = parse_unsigned(value);
    return;
  }
  if (key == "n_patients") {
    config.n_patients = static_cast<std::size_t>(parse_unsigned(value));
    return;
  }
  for (const auto& [name, ptr] : numeric_fields(config)) {
    if (name != key) continue;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(value, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("config " + key + ": expected a number, got '" + value + "'");
    }
    if (used != value.size()) throw std::invalid_argument("config " + key + ": expected a number, got '" + value + "'");
    *ptr = x;
    return;
  }
  throw std::invalid_argument("unknown config key '" + key + "'");
}

// --- size sampler -----------------------------------------------------------

SizeSampler::SizeSampler(double mean_cm, double sd_cm) {
  if (!(mean_cm > 0.0) || !(sd_cm > 0.0) || !std::isfinite(mean_cm) || !std::isfinite(sd_cm)) {
    throw std::invalid_argument("size sampler needs positive mean and sd");
  }
  if (!(mean_cm > kLow && mean_cm < kHigh)) throw std::invalid_argument("size mean must lie inside (0.1, 8.0)");
  sigma_ = std::sqrt(std::log1p((sd_cm / mean_cm) * (sd_cm / mean_cm)));
  const double la = std::log(kLow);
  const double lb = std::log(kHigh);
  // E[X | a < X < b] for X ~ lognormal(mu, sigma); increasing in mu.
  auto truncated_mean = [&](double mu) {
    const double s = sigma_;
    const double num = phi((lb - mu - s * s) / s) - phi((la - mu - s * s) / s);
    const double den = phi((lb - mu) / s) - phi((la - mu) / s);
    if (den <= 0.0) return mu < la ? kLow : kHigh;
    return std::exp(mu + s * s / 2.0) * num / den;
  };
  double lo = la - 10.0 * sigma_ - 1.0;
  double hi = lb + 10.0 * sigma_ + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (truncated_mean(mid) < mean_cm ? lo : hi) = mid;
  }
  mu_ = 0.5 * (lo + hi);
}

double SizeSampler::operator()(Rng& rng) const {
  const double la = std::log(kLow);
  const double lb = std::log(kHigh);
  double z;
  do {
    z = mu_ + sigma_ * rng.normal();
  } while (z < la || z > lb);
  return SizeCm::round(std::exp(z)).cm();
}

double size_sampler(const GenConfig& config, Rng& rng) { return SizeSampler(config.size_mean_cm, config.size_sd_cm)(rng); }

// --- risk model -------------------------------------------------------------

double cell_odds_ratio(Modality m, BodyGroup g) {
  // Rows: modality; columns: Head, Neck, Chest, Mixed.
  static constexpr double kCell[5][4] = {
      {0.59, 3.41, 1.00, 1.13},   // CT
      {0.12, 0.27, 0.25, 0.39},   // MRI
      {0.49, 25.54, 3.07, 0.87},  // nuclear medicine
      {0.14, 4.83, 5.90, 0.73},   // PET
      {0.17, 0.12, 0.07, 0.38},   // ultrasound
  };
  return kCell[static_cast<std::size_t>(m)][static_cast<std::size_t>(g)];
}

Subject draw_subject(const GenConfig& config, Rng& rng) {
  Subject s;
  s.sex = rng.bernoulli(61213.0 / 115640.0) ? Sex::Female : Sex::Male;
  s.age_years = static_cast<int>(std::lround(std::clamp(rng.normal(56.8, 17.2), 18.0, 100.0)));
  s.bmi = std::round(std::clamp(rng.normal(29.1, 7.1), 14.0, 70.0) * 10.0) / 10.0;
  s.modality = static_cast<Modality>(draw(rng, config.modality_mix));
  s.body_group = static_cast<BodyGroup>(draw(rng, config.body_mix));
  return s;
}

double ItfRiskModel::linear(const Subject& s) const {
  return intercept_ + (s.sex == Sex::Female ? kLnFemale : 0.0) + (s.age_years - 55.0) / 5.0 * kLnAgePer5 +
         (s.bmi - 29.0) / 5.0 * kLnBmiPer5 + std::log(cell_odds_ratio(s.modality, s.body_group));
}

ItfRiskModel::ItfRiskModel(const GenConfig& config) {
  constexpr std::size_t kPilot = 100000;
  constexpr std::uint64_t kPilotSeed = 0x9E3779B97F4A7C15ULL;
  std::vector<double> eta(kPilot);
  std::vector<bool> pet_nm(kPilot);
  Rng rng(kPilotSeed);
  intercept_ = 0.0;
  for (std::size_t i = 0; i < kPilot; ++i) {
    const Subject s = draw_subject(config, rng);
    eta[i] = linear(s);
    pet_nm[i] = s.modality == Modality::PET || s.modality == Modality::NuclearMedicine;
  }
  auto mean_risk = [&](double b0) {
    double total = 0.0;
    for (double e : eta) total += 1.0 / (1.0 + std::exp(-(b0 + e)));
    return total / kPilot;
  };
  if (config.itf_prevalence <= 0.0 || config.itf_prevalence >= 1.0) {
    intercept_ = config.itf_prevalence <= 0.0 ? -INFINITY : INFINITY;
    pet_nm_share_ = 0.0;
    for (std::size_t i = 0; i < kPilot; ++i) pet_nm_share_ += pet_nm[i];
    pet_nm_share_ /= kPilot;
    return;
  }
  double lo = -40.0;
  double hi = 40.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_risk(mid) < config.itf_prevalence ? lo : hi) = mid;
  }
  intercept_ = 0.5 * (lo + hi);
  double weight = 0.0;
  double pet_nm_weight = 0.0;
  for (std::size_t i = 0; i < kPilot; ++i) {
    const double p = 1.0 / (1.0 + std::exp(-(intercept_ + eta[i])));
    weight += p;
    if (pet_nm[i]) pet_nm_weight += p;
  }
  pet_nm_share_ = pet_nm_weight / weight;
}

double ItfRiskModel::probability(const Subject& s) const {
  if (std::isinf(intercept_)) return intercept_ > 0 ? 1.0 : 0.0;
  return 1.0 / (1.0 + std::exp(-linear(s)));
}

namespace {

Subject draw_with_outcome(const GenConfig& config, const ItfRiskModel& model, Rng& rng) {
  Subject s = draw_subject(config, rng);
  s.itf = rng.bernoulli(model.probability(s));
  return s;
}

}  // namespace

std::vector<Subject> sample_subjects(const GenConfig& config, std::size_t n) {
  config.validate();
  const ItfRiskModel model(config);
  std::vector<Subject> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(config.seed, i));
    out.push_back(draw_with_outcome(config, model, rng));
  }
  return out;
}

// --- generate -----------------------------------------------------------------

SynthCorpus generate(const GenConfig& config, unsigned threads) {
  config.validate();
  SynthCorpus out;
  if (config.n_patients == 0) return out;
  const ItfRiskModel model(config);
  const SizeSampler sizes(config.size_mean_cm, config.size_sd_cm);
  const double metabolic_share = model.pet_nm_share_among_itf();
  const double metabolic_rate =
      metabolic_share > 0.0 ? std::min(1.0, config.feature_presence.at("metabolic_activity") / metabolic_share) : 0.0;

  struct PatientOut {
    std::vector<ReportDoc> docs;
    std::vector<AnnotatedReport> gold;
    PatientTimeline timeline;
    PatientTruth truth;
  };
  std::vector<PatientOut> slots(config.n_patients);
  parallel_for(config.n_patients, threads, [&](std::size_t i) {
    PatientOut& slot = slots[i];
    char buf[32];
    Rng rng(derive_seed(config.seed, i));
    PatientTruth truth;
    truth.subject = draw_with_outcome(config, model, rng);
    Subject& s = truth.subject;
    std::snprintf(buf, sizeof buf, "P%06zu", i + 1);
    truth.patient_id = buf;

    const double u = rng.uniform();
    if (u < config.minor_rate) {
      truth.intended = Eligibility::Minor;
      s.age_years = static_cast<int>(rng.between(15, 17));
    } else if (u < config.minor_rate + config.short_lookback_rate) {
      truth.intended = Eligibility::InsufficientLookback;
    } else if (u < config.minor_rate + config.short_lookback_rate + config.prior_history_rate) {
      truth.intended = Eligibility::PriorThyroidHistory;
    }

    // Report content.
    Block thyroid;
    truth.expected.label = ReportLabel::NoFinding;
    if (s.itf) {
      if (rng.bernoulli(config.itn_share)) {
        const bool pet_nm = s.modality == Modality::PET || s.modality == Modality::NuclearMedicine;
        thyroid = itn_block(config, rng, pet_nm, metabolic_rate, sizes, truth.expected);
      } else {
        truth.expected.label = ReportLabel::NonNodular;
        const bool negated = rng.bernoulli(config.negation_rate * 0.5);
        thyroid = parse_template(negated ? kNonNodularNegated : pick(rng, kNonNodular));
      }
    } else if (rng.bernoulli(config.negation_rate)) {
      truth.hard_case = rng.bernoulli(kNegationHardShare);
      thyroid = parse_template(truth.hard_case ? kNegationHard : pick(rng, kNegation));
    } else if (rng.bernoulli(config.distractor_rate)) {
      truth.hard_case = rng.bernoulli(kDistractorHardShare);
      thyroid = parse_template(truth.hard_case ? kDistractorHard : pick(rng, kDistractor));
    }
    truth.label = truth.expected.label;

    // Dates.
    const Date index = kIndexFirst + rng.between(0, kIndexLast - kIndexFirst);
    const long history = truth.intended == Eligibility::InsufficientLookback ? rng.between(30, kLookbackDays - 1)
                                                                              : kLookbackDays + rng.between(0, 1500);
    TimelineBuilder tb;
    tb.t.patient_id = truth.patient_id;
    tb.t.sex = s.sex;
    tb.t.birth_date = birth_for_age(index, s.age_years, rng);
    tb.t.first_record_date = index - history;
    if (!rng.bernoulli(config.bmi_missing_rate)) tb.t.bmi = s.bmi;
    for (const auto& f : demographic_fields()) {
      const std::size_t level = rng.categorical(std::span<const double>(f.weights));
      if (rng.bernoulli(f.observed)) tb.t.demographics[f.key] = f.levels[level];
    }

    // Reports and their imaging events.
    const std::string report_id = "R" + truth.patient_id.substr(1) + "-1";
    truth.expected.report_id = report_id;
    truth.report_ids.push_back(report_id);
    auto r1 = render(report_id, truth.patient_id, index, s.modality, s.body_group, thyroid, truth.label, rng);
    auto [sys1, code1] = imaging_code(s.modality, s.body_group, rng);
    tb.add(index, sys1, code1, report_id);
    slot.docs.push_back(std::move(r1.doc));
    slot.gold.push_back(std::move(r1.gold));
    if (rng.bernoulli(config.duplicate_rate)) {
      const std::string dup_id = "R" + truth.patient_id.substr(1) + "-2";
      truth.report_ids.push_back(dup_id);
      auto r2 = render(dup_id, truth.patient_id, index, s.modality, s.body_group, thyroid, truth.label, rng);
      auto [sys2, code2] = imaging_code(s.modality, s.body_group, rng);
      tb.add(index, sys2, code2, dup_id);
      slot.docs.push_back(std::move(r2.doc));
      slot.gold.push_back(std::move(r2.gold));
    }

    // Baseline comorbidities inside [index - 365, index).
    const long lookback_span = std::min<long>(kLookbackDays, index - tb.t.first_record_date);
    for (const auto& c : kCharlsonSources) {
      if (rng.bernoulli(c.rate)) tb.add(index - rng.between(1, lookback_span), c.system, c.code);
    }
    if (truth.intended == Eligibility::PriorThyroidHistory) {
      const auto& e = kPriorHistory[rng.below(std::size(kPriorHistory))];
      tb.add(index - rng.between(1, index - tb.t.first_record_date), e.system, e.code);
    } else if (rng.bernoulli(0.01)) {
      // Same-day thyroid code: not prior history.
      tb.add(index, CodeSystem::ICD10, "E04.1");
    }

    // Routine noise.
    const long span_after = 720;
    for (int k = 0, n = static_cast<int>(rng.below(4)); k < n; ++k) {
      const long offset = rng.between(-(index - tb.t.first_record_date), span_after);
      const char* noise[] = {"I10", "E78.5", "99213", "71046"};
      const std::size_t which = rng.below(4);
      tb.add(index + offset, which < 2 ? CodeSystem::ICD10 : CodeSystem::CPT, noise[which]);
    }
    if (rng.bernoulli(0.05)) tb.add(index + rng.between(200, 700), CodeSystem::CPT, "71250");

    add_outcomes(tb, index, s.itf ? config.itf_outcomes : config.non_itf_outcomes, rng, truth.outcomes);
    if (!truth.outcomes.ultrasound && rng.bernoulli(0.005)) {
      tb.add(index + rng.between(400, 700), CodeSystem::ICD10, "E04.1");
    }

    std::sort(tb.t.events.begin(), tb.t.events.end(), event_less);
    slot.timeline = std::move(tb.t);
    slot.truth = std::move(truth);
  });
  for (auto& slot : slots) {
    std::move(slot.docs.begin(), slot.docs.end(), std::back_inserter(out.docs));
    std::move(slot.gold.begin(), slot.gold.end(), std::back_inserter(out.gold));
    out.timelines.push_back(std::move(slot.timeline));
    out.truth.push_back(std::move(slot.truth));
  }
  return out;
}

}  // namespace itf
