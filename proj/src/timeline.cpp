#include "itf/timeline.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <tuple>

#include "itf/errors.hpp"
#include "json.hpp"

namespace itf {
namespace {

using ordered_json = nlohmann::ordered_json;

const nlohmann::json& field(const nlohmann::json& j, const char* key, std::size_t line_no) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(line_no, std::string("missing '") + key + "'");
  return *it;
}

std::string string_field(const nlohmann::json& j, const char* key, std::size_t line_no) {
  const auto& v = field(j, key, line_no);
  if (!v.is_string()) throw ParseError(line_no, std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

Date date_field(const nlohmann::json& j, const char* key, std::size_t line_no) {
  try {
    return Date::parse(string_field(j, key, line_no));
  } catch (const std::invalid_argument& e) {
    throw ParseError(line_no, std::string("'") + key + "': " + e.what());
  }
}

template <typename E>
E enum_field(const nlohmann::json& j, const char* key, std::size_t line_no) {
  const auto s = string_field(j, key, line_no);
  auto e = enum_from_string<E>(s);
  if (!e) throw ParseError(line_no, std::string("unknown ") + key + " '" + s + "'");
  return *e;
}

}  // namespace

bool event_less(const CodedEvent& a, const CodedEvent& b) {
  return std::tie(a.date, a.system, a.code, a.accession) < std::tie(b.date, b.system, b.code, b.accession);
}

std::vector<std::string> validate_timeline(const PatientTimeline& t) {
  std::vector<std::string> problems;
  if (t.patient_id.empty()) problems.push_back("empty patient_id");
  if (!std::is_sorted(t.events.begin(), t.events.end(), event_less)) problems.push_back("events not sorted");
  for (const auto& e : t.events) {
    if (e.patient_id != t.patient_id) problems.push_back("event for another patient: " + e.patient_id);
    if (e.code.empty()) problems.push_back("event with empty code on " + e.date.iso());
    if (e.date < t.first_record_date) problems.push_back("event on " + e.date.iso() + " predates first_record_date");
  }
  return problems;
}

std::string timeline_line(const PatientTimeline& t) {
  ordered_json j;
  j["patient_id"] = t.patient_id;
  j["birth_date"] = t.birth_date.iso();
  j["sex"] = to_string(t.sex);
  j["bmi"] = t.bmi ? ordered_json(*t.bmi) : ordered_json(nullptr);
  ordered_json demo = ordered_json::object();
  for (const auto& [k, v] : t.demographics) demo[k] = v;
  j["demographics"] = std::move(demo);
  j["first_record_date"] = t.first_record_date.iso();
  auto events = ordered_json::array();
  for (const auto& e : t.events) {
    ordered_json ev;
    ev["date"] = e.date.iso();
    ev["system"] = to_string(e.system);
    ev["code"] = e.code;
    if (e.accession) ev["accession"] = *e.accession;
    events.push_back(std::move(ev));
  }
  j["events"] = std::move(events);
  return j.dump();
}

PatientTimeline parse_timeline_line(std::string_view line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError(line_no, "timeline record must be an object");
  PatientTimeline t;
  t.patient_id = string_field(j, "patient_id", line_no);
  t.birth_date = date_field(j, "birth_date", line_no);
  t.sex = enum_field<Sex>(j, "sex", line_no);
  if (auto it = j.find("bmi"); it != j.end() && !it->is_null()) {
    if (!it->is_number()) throw ParseError(line_no, "'bmi' must be a number or null");
    t.bmi = it->get<double>();
  }
  if (auto it = j.find("demographics"); it != j.end()) {
    if (!it->is_object()) throw ParseError(line_no, "'demographics' must be an object");
    for (const auto& [k, v] : it->items()) {
      if (!v.is_string()) throw ParseError(line_no, "demographic '" + k + "' must be a string");
      t.demographics[k] = v.get<std::string>();
    }
  }
  t.first_record_date = date_field(j, "first_record_date", line_no);
  const auto& events = field(j, "events", line_no);
  if (!events.is_array()) throw ParseError(line_no, "'events' must be an array");
  for (const auto& ev : events) {
    if (!ev.is_object()) throw ParseError(line_no, "event must be an object");
    CodedEvent e;
    e.patient_id = t.patient_id;
    e.date = date_field(ev, "date", line_no);
    e.system = enum_field<CodeSystem>(ev, "system", line_no);
    e.code = string_field(ev, "code", line_no);
    if (e.code.empty()) throw ParseError(line_no, "event code is empty");
    if (auto it = ev.find("accession"); it != ev.end() && !it->is_null()) {
      if (!it->is_string()) throw ParseError(line_no, "'accession' must be a string");
      e.accession = it->get<std::string>();
    }
    t.events.push_back(std::move(e));
  }
  std::sort(t.events.begin(), t.events.end(), event_less);
  return t;
}

std::vector<PatientTimeline> read_timelines(std::istream& in) {
  std::vector<PatientTimeline> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) throw ParseError(line_no, "empty line");
    auto t = parse_timeline_line(line, line_no);
    if (!seen.insert(t.patient_id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate patient_id '" + t.patient_id + "'");
    }
    if (auto problems = validate_timeline(t); !problems.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + problems.front());
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<PatientTimeline> read_timelines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_timelines(in);
}

void write_timelines(std::ostream& out, std::span<const PatientTimeline> timelines) {
  for (const auto& t : timelines) out << timeline_line(t) << '\n';
}

}  // namespace itf
