#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "itf/timeline.hpp"

namespace itf {

/// Named code sets keyed by coding system.
///
/// Entries are exact codes, inclusive ranges ("70480-70492", "G0210-G0234",
/// "425.4-425.9") expanded at load time, or prefixes ending in '*' ("I50*").
/// A range of prefixes ("I60*-I69*") expands to one prefix per step.
class CodeTable {
 public:
  /// Built-in inclusion, exclusion, outcome and comorbidity sets.
  static CodeTable defaults();
  /// CSV with header set_name,system,code_or_range. Throws ParseError.
  static CodeTable from_csv(std::istream& in);
  static CodeTable from_csv(const std::filesystem::path& path);

  /// Throws std::invalid_argument on malformed or reversed ranges.
  void add(const std::string& set_name, CodeSystem system, std::string_view code_or_range);

  bool contains(std::string_view set_name, CodeSystem system, std::string_view code) const;
  bool contains(std::string_view set_name, const CodedEvent& e) const { return contains(set_name, e.system, e.code); }
  bool has_set(std::string_view set_name) const;
  std::vector<std::string> set_names() const;
  /// Exact codes of one set and system (prefix entries excluded).
  std::vector<std::string> exact_codes(std::string_view set_name, CodeSystem system) const;

 private:
  struct Entries {
    std::set<std::string> exact;
    std::vector<std::string> prefixes;
  };
  std::map<std::string, std::map<CodeSystem, Entries>, std::less<>> sets_;
};

/// Expands one code_or_range expression; prefix entries keep their trailing '*'.
/// Throws std::invalid_argument.
std::vector<std::string> expand_code_range(std::string_view expr);

/// Code sets whose presence before the index date excludes a patient.
inline constexpr std::string_view kExclusionSets[] = {"thyroid_nodule", "thyroid_cancer", "hyperthyroidism",
                                                      "thyroidectomy",  "partial_thyroidectomy", "biopsy"};

}  // namespace itf
