#include "itf/extract.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "itf/errors.hpp"
#include "itf/parallel.hpp"
#include "json.hpp"

namespace itf {
namespace {

struct UnitInfo {
  std::string_view token;
  long scale;  // ten-thousandths of a cm per unit of the parsed number's thousandths
};

// Parsed numbers are held in thousandths; cm * 10 and mm * 1 give ten-thousandths of a cm.
constexpr UnitInfo kUnits[] = {{"cm", 10}, {"centimeter", 10}, {"centimeters", 10},
                               {"mm", 1},  {"millimeter", 1},  {"millimeters", 1}};

std::optional<long> unit_scale(const std::string& norm) {
  for (const auto& u : kUnits) {
    if (u.token == norm) return u.scale;
  }
  return std::nullopt;
}

/// Decimal string -> thousandths, exact. nullopt for malformed or over-precise numbers.
std::optional<long> parse_thousandths(const std::string& s) {
  long whole = 0;
  long frac = 0;
  int frac_digits = 0;
  bool dot = false;
  if (s.empty()) return std::nullopt;
  for (char c : s) {
    if (c == '.') {
      if (dot) return std::nullopt;
      dot = true;
    } else if (c >= '0' && c <= '9') {
      if (dot) {
        if (frac_digits == 3) return std::nullopt;
        frac = frac * 10 + (c - '0');
        ++frac_digits;
      } else {
        whole = whole * 10 + (c - '0');
        if (whole > 1'000'000) return std::nullopt;
      }
    } else {
      return std::nullopt;
    }
  }
  while (frac_digits < 3) {
    frac *= 10;
    ++frac_digits;
  }
  return whole * 1000 + frac;
}

struct SizeExpr {
  std::size_t first_token;
  std::size_t last_token;  // exclusive
  std::optional<SizeCm> value;
  std::string warning;
};

// Ten-thousandths of a cm -> tenths, half away from zero.
long round_to_tenths(long ten_thousandths) { return (ten_thousandths + 500) / 1000; }

/// Size expressions: NUM [UNIT] ((x|by) NUM [UNIT])* with at least one unit.
/// Numbers without their own unit take the next unit that follows them.
std::vector<SizeExpr> find_sizes(const std::vector<Token>& toks, std::size_t first, std::size_t last,
                                 std::vector<std::string>* warnings) {
  std::vector<SizeExpr> out;
  std::vector<bool> consumed(last > first ? last - first : 0, false);
  std::size_t i = first;
  while (i < last) {
    if (!toks[i].numeric) {
      ++i;
      continue;
    }
    std::vector<std::pair<std::string, std::optional<long>>> numbers;  // raw text, unit scale
    std::size_t k = i;
    numbers.push_back({toks[k].norm, std::nullopt});
    ++k;
    bool any_unit = false;
    while (k < last) {
      if (auto scale = unit_scale(toks[k].norm)) {
        for (auto& n : numbers) {
          if (!n.second) n.second = scale;
        }
        any_unit = true;
        ++k;
        continue;
      }
      if ((toks[k].norm == "x" || toks[k].norm == "by") && k + 1 < last && toks[k + 1].numeric) {
        numbers.push_back({toks[k + 1].norm, std::nullopt});
        k += 2;
        continue;
      }
      break;
    }
    if (!any_unit) {
      i = k;
      continue;
    }
    // Trailing numbers without a unit are not part of the expression.
    while (!numbers.back().second) {
      numbers.pop_back();
      k -= 2;
    }
    SizeExpr e{i, k, std::nullopt, {}};
    long best = -1;
    for (const auto& [raw, scale] : numbers) {
      auto th = parse_thousandths(raw);
      if (!th) {
        e.warning = "unparseable size number '" + raw + "'";
        best = -1;
        break;
      }
      best = std::max(best, *th * *scale);
    }
    if (e.warning.empty()) {
      const long tenths = round_to_tenths(best);
      if (best <= 0) {
        e.warning = "non-positive size";
      } else {
        e.value = SizeCm::from_tenths(tenths);
      }
    }
    for (std::size_t c = i; c < k; ++c) consumed[c - first] = true;
    out.push_back(std::move(e));
    i = k;
  }
  if (warnings) {
    for (std::size_t c = first; c < last; ++c) {
      if (!consumed[c - first] && unit_scale(toks[c].norm)) {
        warnings->push_back("unparseable size expression near '" + toks[c].norm + "'");
      }
    }
  }
  return out;
}

template <typename E>
std::optional<E> subtype_enum(const std::string& s) {
  return enum_from_string<E>(s);
}

template <typename E>
void set_first(std::optional<E>& slot, std::optional<E> value, E weakest) {
  if (!value) return;
  if (!slot || (*slot == weakest && *value != weakest)) slot = value;
}

bool token_in(const std::string& norm, std::span<const std::string_view> set) {
  return std::any_of(set.begin(), set.end(), [&](std::string_view s) { return s == norm; });
}

using ordered_json = nlohmann::ordered_json;

template <typename E>
ordered_json opt_enum(const std::optional<E>& v) {
  return v ? ordered_json(std::string(to_string(*v))) : ordered_json(nullptr);
}

template <typename E>
std::optional<E> read_enum(const nlohmann::json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) throw ParseError(line_no, std::string("'") + key + "' must be a string or null");
  auto e = enum_from_string<E>(it->get<std::string>());
  if (!e) throw ParseError(line_no, std::string("unknown ") + key + " '" + it->get<std::string>() + "'");
  return e;
}

}  // namespace

EntityCategory attribute_category(TermKind kind) {
  switch (kind) {
    case TermKind::Location: return EntityCategory::Location;
    case TermKind::Density:
    case TermKind::Attenuation:
    case TermKind::Enhancement:
    case TermKind::Metabolic:
    case TermKind::Calcification: return EntityCategory::RadiologicalCharacteristic;
    case TermKind::QualitativeSize: return EntityCategory::Size;
    case TermKind::Number: return EntityCategory::NumberOfFindings;
    case TermKind::Associated: return EntityCategory::AssociatedFinding;
    case TermKind::Classification: return EntityCategory::RadiologyClassification;
    case TermKind::Recommendation: return EntityCategory::Recommendation;
    default: throw std::invalid_argument("not a stage-2 term kind");
  }
}

std::string attribute_subtype(TermKind kind, std::string_view subtype) {
  switch (kind) {
    case TermKind::Density: return "Density:" + std::string(subtype);
    case TermKind::Attenuation: return "Attenuation:" + std::string(subtype);
    case TermKind::Enhancement: return "Enhancement:" + std::string(subtype);
    case TermKind::Metabolic: return "Metabolic:" + std::string(subtype);
    case TermKind::Calcification: return "Calcification";
    default: return std::string(subtype);
  }
}

SizeCm SizeCm::round(double cm) {
  if (!(cm > 0.0) || !std::isfinite(cm)) throw std::invalid_argument("size must be positive");
  // The nudge absorbs binary representation error, e.g. 4.05 stored as 4.04999...
  return SizeCm(static_cast<long>(std::floor(cm * 10.0 + 0.5 + 1e-9)));
}

SizeBin bin_size(SizeCm size) {
  const long t = size.tenths();
  if (t <= 10) return SizeBin::UpTo1;
  if (t <= 20) return SizeBin::From1To2;
  if (t <= 30) return SizeBin::From2To3;
  if (t <= 40) return SizeBin::From3To4;
  return SizeBin::Over4;
}

SizeBin bin_size(double size_cm) { return bin_size(SizeCm::round(size_cm)); }

std::optional<SizeMeasurement> parse_size(std::string_view fragment) {
  const AnalyzedText text{std::string(fragment)};
  const auto& toks = text.tokens();
  for (const auto& e : find_sizes(toks, 0, toks.size(), nullptr)) {
    if (e.value) return SizeMeasurement{e.value, std::nullopt};
  }
  for (const auto& a : attribute_terms()) {
    if (a.kind != TermKind::QualitativeSize) continue;
    for (const auto& t : toks) {
      if (t.norm == a.phrase) return SizeMeasurement{std::nullopt, std::string(a.phrase)};
    }
  }
  return std::nullopt;
}

std::optional<NoduleLocation> infer_bilaterality(std::span<const EntitySpan> spans) {
  bool right = false, left = false, bilateral = false, isthmus = false;
  for (const auto& s : spans) {
    if (s.category != EntityCategory::Location || !s.subtype) continue;
    auto loc = enum_from_string<NoduleLocation>(*s.subtype);
    if (!loc) continue;
    switch (*loc) {
      case NoduleLocation::Right: right = true; break;
      case NoduleLocation::Left: left = true; break;
      case NoduleLocation::Bilateral: bilateral = true; break;
      case NoduleLocation::Isthmus: isthmus = true; break;
    }
  }
  if (bilateral || (right && left)) return NoduleLocation::Bilateral;
  if (right) return NoduleLocation::Right;
  if (left) return NoduleLocation::Left;
  if (isthmus) return NoduleLocation::Isthmus;
  return std::nullopt;
}

bool FindingResult::has_nodule_attributes() const {
  return location || size || size_bin || qualitative_size || density || enhancement || calcified || attenuation ||
         metabolic_activity || metabolic_distribution || recommendation;
}

FindingResult extract_entities(const ReportDoc& doc, const Stage1Result& stage1, const ReportScanner& scanner) {
  FindingResult out;
  out.report_id = doc.report_id;
  out.label = stage1.label;
  out.flags = stage1.flags;
  out.spans = stage1.evidence;
  if (stage1.label != ReportLabel::ITN) return out;

  const auto scan = scanner.scan(doc.text);
  const auto& sentences = scan.text.sentences();
  const auto& toks = scan.text.tokens();
  const std::size_t ns = sentences.size();

  std::vector<bool> attr(ns, false);
  for (std::size_t s = 0; s < ns; ++s) attr[s] = scan.thyroid_context[s] && scan.has_nodular(s);
  if (std::find(attr.begin(), attr.end(), true) == attr.end()) attr = scan.thyroid_context;
  std::vector<bool> rec(ns, false);
  for (std::size_t s = 0; s < ns; ++s) {
    if (!scan.thyroid_context[s]) continue;
    rec[s] = true;
    if (s + 1 < ns) rec[s + 1] = true;
  }

  auto span_of = [&](const ScannedTerm& t, EntityCategory cat, std::string subtype) {
    return EntitySpan{t.begin, t.end, cat, std::move(subtype), scan.text.text().slice(t.begin, t.end)};
  };

  std::vector<EntitySpan> spans;
  std::set<std::size_t> metabolic_sentences;
  for (const auto& t : scan.terms) {
    const auto kind = t.info.kind;
    if (kind == TermKind::Recommendation) {
      if (rec[t.sentence]) {
        spans.push_back(span_of(t, EntityCategory::Recommendation, t.info.subtype));
        auto r = subtype_enum<RecommendationKind>(t.info.subtype);
        if (r && (!out.recommendation || *r < *out.recommendation)) out.recommendation = r;
      }
      continue;
    }
    if (!attr[t.sentence]) continue;
    if (is_negatable(kind) && t.negated) continue;
    switch (kind) {
      case TermKind::Density:
        if (!out.density) out.density = subtype_enum<Density>(t.info.subtype);
        break;
      case TermKind::Attenuation:
        set_first(out.attenuation, subtype_enum<Attenuation>(t.info.subtype), Attenuation::Unspecified);
        break;
      case TermKind::Enhancement:
        set_first(out.enhancement, subtype_enum<Enhancement>(t.info.subtype), Enhancement::Enhancing);
        break;
      case TermKind::Metabolic:
        set_first(out.metabolic_activity, subtype_enum<MetabolicActivity>(t.info.subtype), MetabolicActivity::Ambiguous);
        metabolic_sentences.insert(t.sentence);
        break;
      case TermKind::Calcification:
        out.calcified = true;
        // Without a nodule in the sentence the term is a screening finding instead.
        if (!scan.has_nodular(t.sentence)) continue;
        break;
      case TermKind::QualitativeSize:
        if (!out.qualitative_size) out.qualitative_size = toks[t.first_token].norm;
        break;
      case TermKind::Location:
      case TermKind::Number:
      case TermKind::Associated:
      case TermKind::Classification:
        break;
      default:
        continue;
    }
    spans.push_back(span_of(t, attribute_category(kind), attribute_subtype(kind, t.info.subtype)));
  }

  for (std::size_t s = 0; s < ns; ++s) {
    if (!attr[s]) continue;
    for (const auto& e : find_sizes(toks, sentences[s].first_token, sentences[s].last_token, &out.warnings)) {
      if (!e.warning.empty()) {
        out.warnings.push_back(e.warning);
        continue;
      }
      const auto begin = toks[e.first_token].begin;
      const auto end = toks[e.last_token - 1].end;
      spans.push_back({begin, end, EntityCategory::Size, std::string("Numeric"), scan.text.text().slice(begin, end)});
      if (!out.size || *e.value > *out.size) out.size = e.value;
    }
  }
  if (out.size) out.size_bin = bin_size(*out.size);

  if (out.metabolic_activity) {
    out.metabolic_distribution = MetabolicDistribution::NotDescribed;
    for (std::size_t s : metabolic_sentences) {
      for (std::size_t k = sentences[s].first_token; k < sentences[s].last_token; ++k) {
        if (token_in(toks[k].norm, diffuse_cues())) {
          out.metabolic_distribution = MetabolicDistribution::Diffuse;
        } else if (token_in(toks[k].norm, focal_cues())) {
          out.metabolic_distribution = MetabolicDistribution::Focal;
        } else {
          continue;
        }
        break;
      }
      if (out.metabolic_distribution != MetabolicDistribution::NotDescribed) break;
    }
  }

  out.location = infer_bilaterality(spans);
  out.spans.insert(out.spans.end(), spans.begin(), spans.end());
  std::sort(out.spans.begin(), out.spans.end(), span_less);
  out.spans.erase(std::unique(out.spans.begin(), out.spans.end()), out.spans.end());
  return out;
}

FindingResult extract_entities(const ReportDoc& doc, const Stage1Result& stage1) {
  return extract_entities(doc, stage1, default_scanner());
}

std::vector<FindingResult> run_pipeline(std::span<const ReportDoc> docs, const DetectorBackend& backend,
                                        const ReportScanner& scanner, unsigned threads) {
  std::vector<FindingResult> out(docs.size());
  parallel_for(docs.size(), threads, [&](std::size_t i) {
    out[i] = extract_entities(docs[i], classify_report(docs[i], backend, scanner), scanner);
  });
  return out;
}

std::string finding_line(const FindingResult& f) {
  ordered_json j;
  j["report_id"] = f.report_id;
  j["label"] = to_string(f.label);
  j["location"] = opt_enum(f.location);
  j["size_cm"] = f.size ? ordered_json(f.size->cm()) : ordered_json(nullptr);
  j["size_bin"] = opt_enum(f.size_bin);
  j["qualitative_size"] = f.qualitative_size ? ordered_json(*f.qualitative_size) : ordered_json(nullptr);
  j["density"] = opt_enum(f.density);
  j["enhancement"] = opt_enum(f.enhancement);
  j["calcified"] = f.calcified ? ordered_json(*f.calcified) : ordered_json(nullptr);
  j["attenuation"] = opt_enum(f.attenuation);
  j["metabolic_activity"] = opt_enum(f.metabolic_activity);
  j["metabolic_distribution"] = opt_enum(f.metabolic_distribution);
  j["recommendation"] = opt_enum(f.recommendation);
  auto spans = ordered_json::array();
  for (const auto& s : f.spans) {
    spans.push_back(ordered_json::array({s.start, s.end, to_string(s.category),
                                         s.subtype ? ordered_json(*s.subtype) : ordered_json(nullptr), s.raw_text}));
  }
  j["spans"] = std::move(spans);
  j["flags"] = f.flags;
  return j.dump();
}

FindingResult parse_finding_line(std::string_view line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("report_id") || !j["report_id"].is_string()) {
    throw ParseError(line_no, "finding record needs a string report_id");
  }
  FindingResult f;
  f.report_id = j["report_id"].get<std::string>();
  auto label = read_enum<ReportLabel>(j, "label", line_no);
  if (!label) throw ParseError(line_no, "missing label");
  f.label = *label;
  f.location = read_enum<NoduleLocation>(j, "location", line_no);
  if (auto it = j.find("size_cm"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError(line_no, "size_cm must be a number");
    f.size = SizeCm::round(it->get<double>());
    f.size_bin = bin_size(*f.size);
  }
  if (auto it = j.find("qualitative_size"); it != j.end() && it->is_string()) f.qualitative_size = it->get<std::string>();
  f.density = read_enum<Density>(j, "density", line_no);
  f.enhancement = read_enum<Enhancement>(j, "enhancement", line_no);
  if (auto it = j.find("calcified"); it != j.end() && it->is_boolean()) f.calcified = it->get<bool>();
  f.attenuation = read_enum<Attenuation>(j, "attenuation", line_no);
  f.metabolic_activity = read_enum<MetabolicActivity>(j, "metabolic_activity", line_no);
  f.metabolic_distribution = read_enum<MetabolicDistribution>(j, "metabolic_distribution", line_no);
  f.recommendation = read_enum<RecommendationKind>(j, "recommendation", line_no);
  if (auto it = j.find("spans"); it != j.end()) {
    // Reuse the annotation span codec.
    nlohmann::ordered_json wrapper;
    wrapper["report_id"] = f.report_id;
    wrapper["annotator_id"] = "system";
    wrapper["report_label"] = to_string(f.label);
    wrapper["spans"] = *it;
    f.spans = parse_annotation_line(wrapper.dump(), line_no).spans;
  }
  if (auto it = j.find("flags"); it != j.end() && it->is_array()) {
    for (const auto& v : *it) {
      if (v.is_string()) f.flags.push_back(v.get<std::string>());
    }
  }
  return f;
}

std::vector<FindingResult> read_findings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<FindingResult> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError(line_no, "empty line");
    out.push_back(parse_finding_line(line, line_no));
  }
  return out;
}

}  // namespace itf
