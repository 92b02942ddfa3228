#include "itf/corpus.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>

#include "itf/errors.hpp"
#include "itf/utf8.hpp"
#include "json.hpp"

namespace itf {

using ordered_json = nlohmann::ordered_json;

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(line_no, std::string("missing key '") + key + "'");
  return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  const auto& v = require(obj, key, line_no);
  if (!v.is_string()) throw ParseError(line_no, std::string("key '") + key + "' must be a string");
  return v.get<std::string>();
}

template <typename E>
E require_enum(const nlohmann::json& obj, const char* key, std::size_t line_no) {
  const auto s = require_string(obj, key, line_no);
  auto e = enum_from_string<E>(s);
  if (!e) throw ParseError(line_no, std::string("unknown ") + key + " '" + s + "'");
  return *e;
}

nlohmann::json parse_object(std::string_view line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "record must be a JSON object");
  return j;
}

template <typename T, typename ParseLine>
std::vector<T> read_lines(std::istream& in, ParseLine parse_line) {
  std::vector<T> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) throw ParseError(line_no, "empty line");
    out.push_back(parse_line(line, line_no));
  }
  return out;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

bool span_less(const EntitySpan& a, const EntitySpan& b) {
  return std::tie(a.start, a.end, a.category, a.subtype) < std::tie(b.start, b.end, b.category, b.subtype);
}

std::string corpus_line(const ReportDoc& doc) {
  ordered_json j;
  j["report_id"] = doc.report_id;
  j["patient_id"] = doc.patient_id;
  j["study_date"] = doc.study_date.iso();
  j["modality"] = to_string(doc.modality);
  j["body_group"] = to_string(doc.body_group);
  j["text"] = doc.text;
  return j.dump();
}

ReportDoc parse_corpus_line(std::string_view line, std::size_t line_no) {
  const auto j = parse_object(line, line_no);
  ReportDoc doc;
  doc.report_id = require_string(j, "report_id", line_no);
  if (doc.report_id.empty()) throw ParseError(line_no, "empty report_id");
  doc.patient_id = require_string(j, "patient_id", line_no);
  try {
    doc.study_date = Date::parse(require_string(j, "study_date", line_no));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, e.what());
  }
  doc.modality = require_enum<Modality>(j, "modality", line_no);
  doc.body_group = require_enum<BodyGroup>(j, "body_group", line_no);
  doc.text = require_string(j, "text", line_no);
  return doc;
}

std::vector<ReportDoc> read_corpus(std::istream& in) {
  auto docs = read_lines<ReportDoc>(in, parse_corpus_line);
  std::set<std::string_view> seen;
  for (const auto& d : docs) {
    if (!seen.insert(d.report_id).second) throw ValidationError("duplicate report_id '" + d.report_id + "'");
  }
  return docs;
}

std::vector<ReportDoc> read_corpus(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_corpus(in);
}

void write_corpus(std::ostream& out, std::span<const ReportDoc> docs) {
  for (const auto& d : docs) out << corpus_line(d) << '\n';
}

std::string annotation_line(const AnnotatedReport& a) {
  ordered_json j;
  j["report_id"] = a.report_id;
  j["annotator_id"] = a.annotator_id;
  j["report_label"] = to_string(a.report_label);
  auto spans = ordered_json::array();
  for (const auto& s : a.spans) {
    ordered_json subtype = s.subtype ? ordered_json(*s.subtype) : ordered_json(nullptr);
    spans.push_back(ordered_json::array({s.start, s.end, to_string(s.category), subtype, s.raw_text}));
  }
  j["spans"] = std::move(spans);
  return j.dump();
}

AnnotatedReport parse_annotation_line(std::string_view line, std::size_t line_no) {
  const auto j = parse_object(line, line_no);
  AnnotatedReport a;
  a.report_id = require_string(j, "report_id", line_no);
  a.annotator_id = require_string(j, "annotator_id", line_no);
  a.report_label = require_enum<ReportLabel>(j, "report_label", line_no);
  const auto& spans = require(j, "spans", line_no);
  if (!spans.is_array()) throw ParseError(line_no, "spans must be an array");
  for (const auto& s : spans) {
    if (!s.is_array() || s.size() != 5 || !s[0].is_number_unsigned() || !s[1].is_number_unsigned() ||
        !s[2].is_string() || !(s[3].is_string() || s[3].is_null()) || !s[4].is_string()) {
      throw ParseError(line_no, "span must be [start, end, category, subtype|null, raw_text]");
    }
    EntitySpan span;
    span.start = s[0].get<std::size_t>();
    span.end = s[1].get<std::size_t>();
    auto cat = enum_from_string<EntityCategory>(s[2].get<std::string>());
    if (!cat) throw ParseError(line_no, "unknown span category '" + s[2].get<std::string>() + "'");
    span.category = *cat;
    if (s[3].is_string()) span.subtype = s[3].get<std::string>();
    span.raw_text = s[4].get<std::string>();
    a.spans.push_back(std::move(span));
  }
  return a;
}

std::vector<AnnotatedReport> read_annotations(std::istream& in) {
  return read_lines<AnnotatedReport>(in, parse_annotation_line);
}

std::vector<AnnotatedReport> read_annotations(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_annotations(in);
}

void write_annotations(std::ostream& out, std::span<const AnnotatedReport> annotations) {
  for (const auto& a : annotations) out << annotation_line(a) << '\n';
}

std::vector<Violation> validate_annotation(const AnnotatedReport& a, const ReportDoc& doc) {
  std::vector<Violation> out;
  if (a.report_id != doc.report_id) {
    out.push_back({"report_id", std::nullopt, "annotation for '" + a.report_id + "' checked against '" + doc.report_id + "'"});
  }
  const Utf8Text text(doc.text);
  bool nodular_finding = false;
  for (std::size_t i = 0; i < a.spans.size(); ++i) {
    const auto& s = a.spans[i];
    if (s.start >= s.end) {
      out.push_back({"start<end", i, "span [" + std::to_string(s.start) + "," + std::to_string(s.end) + ") is empty or reversed"});
      continue;
    }
    if (s.end > text.size()) {
      out.push_back({"end<=length", i, "span end " + std::to_string(s.end) + " exceeds text length " + std::to_string(text.size())});
      continue;
    }
    if (text.slice(s.start, s.end) != s.raw_text) {
      out.push_back({"raw_text", i, "raw_text '" + s.raw_text + "' differs from text '" + text.slice(s.start, s.end) + "'"});
    }
    if (s.category == EntityCategory::TypeOfFinding && s.subtype == kNodularSubtype) nodular_finding = true;
  }
  if (a.report_label == ReportLabel::ITN && !nodular_finding) {
    out.push_back({"itn-without-nodular-span", std::nullopt, "ITN label requires a nodular TypeOfFinding span"});
  }
  return out;
}

AgreementResult agreement_gate(const std::map<std::string, std::vector<std::string>>& labels_by_annotator,
                               double threshold) {
  if (labels_by_annotator.size() < 2) throw std::invalid_argument("agreement_gate: need at least two annotators");
  AgreementResult result;
  result.min_kappa = 1.0;
  for (auto a = labels_by_annotator.begin(); a != labels_by_annotator.end(); ++a) {
    for (auto b = std::next(a); b != labels_by_annotator.end(); ++b) {
      const double k = cohen_kappa(a->second, b->second);
      result.pairs.push_back({a->first, b->first, k});
      result.min_kappa = std::min(result.min_kappa, k);
    }
  }
  result.pass = result.min_kappa > threshold;
  return result;
}

}  // namespace itf
