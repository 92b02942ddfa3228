#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "itf/date.hpp"
#include "itf/enum_names.hpp"

namespace itf {

enum class CodeSystem { ICD9, ICD10, CPT, HCPCS };
enum class Sex { Female, Male };

template <>
struct EnumNames<CodeSystem> {
  static constexpr std::array<std::string_view, 4> names{"ICD9", "ICD10", "CPT", "HCPCS"};
};
template <>
struct EnumNames<Sex> {
  static constexpr std::array<std::string_view, 2> names{"Female", "Male"};
};

struct CodedEvent {
  std::string patient_id;
  Date date;
  CodeSystem system = CodeSystem::CPT;
  std::string code;
  /// Imaging events carry the accession of the report they produced.
  std::optional<std::string> accession;

  bool operator==(const CodedEvent&) const = default;
};

/// Orders by (date, system, code, accession); the canonical event order.
bool event_less(const CodedEvent& a, const CodedEvent& b);

struct PatientTimeline {
  std::string patient_id;
  Date birth_date;
  Sex sex = Sex::Female;
  std::optional<double> bmi;
  std::map<std::string, std::string> demographics;
  std::vector<CodedEvent> events;  // sorted by event_less
  Date first_record_date;

  bool operator==(const PatientTimeline&) const = default;
};

/// Empty iff events are sorted, belong to the patient, have non-empty codes and none
/// predates first_record_date.
std::vector<std::string> validate_timeline(const PatientTimeline& t);

std::string timeline_line(const PatientTimeline& t);
/// Throws ParseError. Events are re-sorted on load.
PatientTimeline parse_timeline_line(std::string_view line, std::size_t line_no = 0);
/// Throws ParseError, and ValidationError on duplicate patient_id or invalid timelines.
std::vector<PatientTimeline> read_timelines(std::istream& in);
std::vector<PatientTimeline> read_timelines(const std::filesystem::path& path);
void write_timelines(std::ostream& out, std::span<const PatientTimeline> timelines);

}  // namespace itf
