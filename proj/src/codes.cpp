#include "itf/codes.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "itf/errors.hpp"

namespace itf {
namespace {

// The printed cervical-spine range "72125-71127" is reversed; 72125-72127 is intended.
// Comorbidity entries are prefixes so that full-length codes (E11.22) match.
constexpr std::string_view kDefaultCodes = R"(set_name,system,code_or_range
qualifying_imaging,HCPCS,G0210-G0234
qualifying_imaging,HCPCS,G0252-G0254
qualifying_imaging,HCPCS,G0330-G0336
qualifying_imaging,CPT,78608
qualifying_imaging,CPT,78810
qualifying_imaging,CPT,78811-78813
qualifying_imaging,CPT,78814-78816
qualifying_imaging,CPT,70480-70492
qualifying_imaging,CPT,71250
qualifying_imaging,CPT,71260
qualifying_imaging,CPT,71270
qualifying_imaging,CPT,72125-72127
qualifying_imaging,CPT,70498
qualifying_imaging,CPT,71275
qualifying_imaging,CPT,70547
qualifying_imaging,CPT,70549
qualifying_imaging,CPT,70540
qualifying_imaging,CPT,70543
qualifying_imaging,CPT,72141
qualifying_imaging,CPT,72142
qualifying_imaging,CPT,72156
qualifying_imaging,CPT,70542
qualifying_imaging,CPT,71550-71552
qualifying_imaging,CPT,93880
qualifying_imaging,CPT,76536
qualifying_imaging,CPT,78070
qualifying_imaging,CPT,78804
qualifying_imaging,CPT,78999
qualifying_imaging,CPT,78452
qualifying_imaging,CPT,93017
thyroid_cancer,ICD9,193
thyroid_cancer,ICD10,C73
thyroid_nodule,ICD9,226
thyroid_nodule,ICD9,241.0
thyroid_nodule,ICD9,241.1
thyroid_nodule,ICD9,240.0
thyroid_nodule,ICD9,241.9
thyroid_nodule,ICD9,246.2
thyroid_nodule,ICD10,D34
thyroid_nodule,ICD10,E01.1
thyroid_nodule,ICD10,D44.0
thyroid_nodule,ICD10,E04.1
thyroid_nodule,ICD10,E04.2
thyroid_nodule,HCPCS,G9552
thyroidectomy,CPT,60212
thyroidectomy,CPT,60225
thyroidectomy,CPT,60240
thyroidectomy,CPT,60252
thyroidectomy,CPT,60254
thyroidectomy,CPT,60270
thyroidectomy,CPT,60271
partial_thyroidectomy,CPT,60210
partial_thyroidectomy,CPT,60220
biopsy,CPT,60001
biopsy,CPT,60100
biopsy,CPT,60300
hyperthyroidism,ICD9,242.01
hyperthyroidism,ICD9,242.10
hyperthyroidism,ICD9,242.11
hyperthyroidism,ICD9,242.20
hyperthyroidism,ICD9,242.21
hyperthyroidism,ICD9,242.30
hyperthyroidism,ICD9,242.31
hyperthyroidism,ICD9,242.40
hyperthyroidism,ICD9,242.41
hyperthyroidism,ICD9,242.80
hyperthyroidism,ICD9,242.81
hyperthyroidism,ICD9,242.90
hyperthyroidism,ICD9,242.91
hyperthyroidism,ICD9,245.0
hyperthyroidism,ICD9,245.1
hyperthyroidism,ICD9,245.3
hyperthyroidism,ICD9,245.4
hyperthyroidism,ICD10,E05.00
hyperthyroidism,ICD10,E05.10
hyperthyroidism,ICD10,E05.20
ultrasound_thyroid,CPT,76536
charlson_aids,ICD10,B20*-B22*
charlson_aids,ICD10,B24*
charlson_aids,ICD9,042*-044*
charlson_cerebrovascular,ICD10,G45*
charlson_cerebrovascular,ICD10,G46*
charlson_cerebrovascular,ICD10,H34.0*
charlson_cerebrovascular,ICD10,I60*-I69*
charlson_cerebrovascular,ICD9,430*-438*
charlson_chf,ICD10,I09.9*
charlson_chf,ICD10,I11.0*
charlson_chf,ICD10,I13.0*
charlson_chf,ICD10,I13.2*
charlson_chf,ICD10,I25.5*
charlson_chf,ICD10,I42.0*
charlson_chf,ICD10,I42.5*-I42.9*
charlson_chf,ICD10,I43*
charlson_chf,ICD10,I50*
charlson_chf,ICD10,P29.0*
charlson_chf,ICD9,428*
charlson_chf,ICD9,398.91*
charlson_chf,ICD9,402.01*
charlson_chf,ICD9,402.11*
charlson_chf,ICD9,402.91*
charlson_chf,ICD9,425.4*-425.9*
charlson_cpd,ICD10,J40*-J47*
charlson_cpd,ICD10,J60*-J67*
charlson_cpd,ICD10,I27.8*
charlson_cpd,ICD10,I27.9*
charlson_cpd,ICD10,J68.4*
charlson_cpd,ICD10,J70.1*
charlson_cpd,ICD10,J70.3*
charlson_cpd,ICD9,490*-505*
charlson_cpd,ICD9,506.4*
charlson_dementia,ICD10,F00*-F03*
charlson_dementia,ICD10,F05.1*
charlson_dementia,ICD10,G30*
charlson_dementia,ICD10,G31.1*
charlson_dementia,ICD9,290*
charlson_dementia,ICD9,331.2*
charlson_diabetes,ICD10,E10.0*
charlson_diabetes,ICD10,E10.1*
charlson_diabetes,ICD10,E10.6*
charlson_diabetes,ICD10,E10.8*
charlson_diabetes,ICD10,E10.9*
charlson_diabetes,ICD10,E11.0*
charlson_diabetes,ICD10,E11.1*
charlson_diabetes,ICD10,E11.6*
charlson_diabetes,ICD10,E11.8*
charlson_diabetes,ICD10,E11.9*
charlson_diabetes,ICD10,E13.0*
charlson_diabetes,ICD10,E13.1*
charlson_diabetes,ICD10,E13.6*
charlson_diabetes,ICD10,E13.8*
charlson_diabetes,ICD10,E13.9*
charlson_diabetes,ICD9,250.0*-250.3*
charlson_diabetes,ICD9,250.7*
charlson_diabetes_organ_damage,ICD10,E10.2*-E10.5*
charlson_diabetes_organ_damage,ICD10,E10.7*
charlson_diabetes_organ_damage,ICD10,E11.2*-E11.5*
charlson_diabetes_organ_damage,ICD10,E11.7*
charlson_diabetes_organ_damage,ICD10,E13.2*-E13.5*
charlson_diabetes_organ_damage,ICD10,E13.7*
charlson_diabetes_organ_damage,ICD9,250.4*-250.6*
charlson_hemiplegia,ICD10,G04.1*
charlson_hemiplegia,ICD10,G11.4*
charlson_hemiplegia,ICD10,G80.1*
charlson_hemiplegia,ICD10,G80.2*
charlson_hemiplegia,ICD10,G81*
charlson_hemiplegia,ICD10,G82*
charlson_hemiplegia,ICD10,G83.0*-G83.4*
charlson_hemiplegia,ICD10,G83.9*
charlson_hemiplegia,ICD9,342*
charlson_hemiplegia,ICD9,344.1*
charlson_liver_disease,ICD10,I85.0*
charlson_liver_disease,ICD10,I85.9*
charlson_liver_disease,ICD10,I86.4*
charlson_liver_disease,ICD10,I98.2*
charlson_liver_disease,ICD10,K70.4*
charlson_liver_disease,ICD10,K71.1*
charlson_liver_disease,ICD10,K72.1*
charlson_liver_disease,ICD10,K72.9*
charlson_liver_disease,ICD10,K76.5*-K76.7*
charlson_liver_disease,ICD9,456.0*-456.2*
charlson_liver_disease,ICD9,572.2*-572.8*
charlson_metastatic_solid_tumor,ICD10,C77*-C80*
charlson_metastatic_solid_tumor,ICD9,196*-199*
charlson_mild_liver_disease,ICD10,B18*
charlson_mild_liver_disease,ICD10,K70.0*-K70.3*
charlson_mild_liver_disease,ICD10,K70.9*
charlson_mild_liver_disease,ICD10,K71.3*-K71.5*
charlson_mild_liver_disease,ICD10,K71.7*
charlson_mild_liver_disease,ICD10,K73*
charlson_mild_liver_disease,ICD10,K74*
charlson_mild_liver_disease,ICD10,K76.0*
charlson_mild_liver_disease,ICD10,K76.2*-K76.4*
charlson_mild_liver_disease,ICD10,K76.8*
charlson_mild_liver_disease,ICD10,K76.9*
charlson_mild_liver_disease,ICD10,Z94.4*
charlson_mild_liver_disease,ICD9,571.2*
charlson_mild_liver_disease,ICD9,571.4*-571.6*
charlson_other_cancer,ICD10,C00*-C26*
charlson_other_cancer,ICD10,C30*-C34*
charlson_other_cancer,ICD10,C37*-C41*
charlson_other_cancer,ICD10,C43*
charlson_other_cancer,ICD10,C45*-C58*
charlson_other_cancer,ICD10,C60*-C76*
charlson_other_cancer,ICD10,C81*-C85*
charlson_other_cancer,ICD10,C88*
charlson_other_cancer,ICD10,C90*-C97*
charlson_other_cancer,ICD9,140*-172*
charlson_other_cancer,ICD9,174*-194*
charlson_other_cancer,ICD9,200*-208*
charlson_peripheral_vascular,ICD10,I70*
charlson_peripheral_vascular,ICD10,I71*
charlson_peripheral_vascular,ICD10,I73.1*
charlson_peripheral_vascular,ICD10,I73.8*
charlson_peripheral_vascular,ICD10,I73.9*
charlson_peripheral_vascular,ICD10,I77.1*
charlson_peripheral_vascular,ICD10,I79.0*
charlson_peripheral_vascular,ICD10,I79.2*
charlson_peripheral_vascular,ICD10,K55.1*
charlson_peripheral_vascular,ICD10,K55.8*
charlson_peripheral_vascular,ICD10,K55.9*
charlson_peripheral_vascular,ICD10,Z95.8*
charlson_peripheral_vascular,ICD10,Z95.9*
charlson_peripheral_vascular,ICD9,440*
charlson_peripheral_vascular,ICD9,441*
charlson_peripheral_vascular,ICD9,443.1*-443.9*
charlson_peripheral_vascular,ICD9,785.4*
charlson_renal,ICD10,N18*
charlson_renal,ICD10,N19*
charlson_renal,ICD10,N05.2*-N05.7*
charlson_renal,ICD10,N03.2*-N03.7*
charlson_renal,ICD10,N25.0*
charlson_renal,ICD10,I12.0*
charlson_renal,ICD10,I13.1*
charlson_renal,ICD10,Z49*
charlson_renal,ICD10,Z94.0*
charlson_renal,ICD10,Z99.2*
charlson_renal,ICD9,582*
charlson_renal,ICD9,583.0*-583.7*
charlson_renal,ICD9,585*
charlson_renal,ICD9,586*
charlson_renal,ICD9,588*
charlson_rheumatologic,ICD10,M05*
charlson_rheumatologic,ICD10,M06*
charlson_rheumatologic,ICD10,M31.5*
charlson_rheumatologic,ICD10,M32*-M34*
charlson_rheumatologic,ICD10,M35.1*
charlson_rheumatologic,ICD10,M35.3*
charlson_rheumatologic,ICD10,M36.0*
charlson_rheumatologic,ICD9,710.0*
charlson_rheumatologic,ICD9,710.1*
charlson_rheumatologic,ICD9,710.4*
charlson_rheumatologic,ICD9,714.0*-714.2*
charlson_rheumatologic,ICD9,714.81*
charlson_rheumatologic,ICD9,725*
charlson_ulcer,ICD10,K25*-K28*
charlson_ulcer,ICD9,531*-534*
)";

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Parts {
  std::string_view head;
  std::string_view digits;
};

// Splits off the trailing digit run: "G0210" -> {"G", "0210"}, "425.4" -> {"425.", "4"}.
Parts split_tail(std::string_view s) {
  std::size_t i = s.size();
  while (i > 0 && s[i - 1] >= '0' && s[i - 1] <= '9') --i;
  return {s.substr(0, i), s.substr(i)};
}

}  // namespace

std::vector<std::string> expand_code_range(std::string_view expr) {
  expr = trim(expr);
  if (expr.empty()) throw std::invalid_argument("empty code");
  const auto dash = expr.find('-');
  if (dash == std::string_view::npos) return {std::string(expr)};

  auto lo = trim(expr.substr(0, dash));
  auto hi = trim(expr.substr(dash + 1));
  const bool lo_prefix = !lo.empty() && lo.back() == '*';
  const bool hi_prefix = !hi.empty() && hi.back() == '*';
  if (lo_prefix != hi_prefix) throw std::invalid_argument("mixed prefix range '" + std::string(expr) + "'");
  if (lo_prefix) {
    lo.remove_suffix(1);
    hi.remove_suffix(1);
  }
  const auto a = split_tail(lo);
  const auto b = split_tail(hi);
  if (a.digits.empty() || a.head != b.head || a.digits.size() != b.digits.size()) {
    throw std::invalid_argument("malformed range '" + std::string(expr) + "'");
  }
  const long from = std::stol(std::string(a.digits));
  const long to = std::stol(std::string(b.digits));
  if (to < from) throw std::invalid_argument("reversed range '" + std::string(expr) + "'");
  if (to - from > 100000) throw std::invalid_argument("range too large '" + std::string(expr) + "'");
  std::vector<std::string> out;
  const int width = static_cast<int>(a.digits.size());
  for (long v = from; v <= to; ++v) {
    std::string digits = std::to_string(v);
    digits.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0');
    out.push_back(std::string(a.head) + digits + (lo_prefix ? "*" : ""));
  }
  return out;
}

void CodeTable::add(const std::string& set_name, CodeSystem system, std::string_view code_or_range) {
  if (set_name.empty()) throw std::invalid_argument("empty set name");
  auto& entries = sets_[set_name][system];
  for (auto& code : expand_code_range(code_or_range)) {
    if (code.back() == '*') {
      code.pop_back();
      if (code.empty()) throw std::invalid_argument("bare '*' prefix");
      entries.prefixes.push_back(std::move(code));
    } else {
      entries.exact.insert(std::move(code));
    }
  }
}

bool CodeTable::contains(std::string_view set_name, CodeSystem system, std::string_view code) const {
  auto s = sets_.find(set_name);
  if (s == sets_.end()) return false;
  auto e = s->second.find(system);
  if (e == s->second.end()) return false;
  if (e->second.exact.count(std::string(code))) return true;
  return std::any_of(e->second.prefixes.begin(), e->second.prefixes.end(),
                     [&](const std::string& p) { return code.substr(0, p.size()) == p; });
}

bool CodeTable::has_set(std::string_view set_name) const { return sets_.find(set_name) != sets_.end(); }

std::vector<std::string> CodeTable::set_names() const {
  std::vector<std::string> out;
  for (const auto& [name, _] : sets_) out.push_back(name);
  return out;
}

std::vector<std::string> CodeTable::exact_codes(std::string_view set_name, CodeSystem system) const {
  auto s = sets_.find(set_name);
  if (s == sets_.end()) return {};
  auto e = s->second.find(system);
  if (e == s->second.end()) return {};
  return {e->second.exact.begin(), e->second.exact.end()};
}

CodeTable CodeTable::from_csv(std::istream& in) {
  CodeTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = trim(line);
    if (row.empty() || row.front() == '#') continue;
    if (line_no == 1) {
      if (row != "set_name,system,code_or_range") throw ParseError(1, "expected header set_name,system,code_or_range");
      continue;
    }
    const auto c1 = row.find(',');
    const auto c2 = c1 == std::string_view::npos ? c1 : row.find(',', c1 + 1);
    if (c2 == std::string_view::npos || row.find(',', c2 + 1) != std::string_view::npos) {
      throw ParseError(line_no, "expected 3 columns");
    }
    const auto name = trim(row.substr(0, c1));
    const auto system = enum_from_string<CodeSystem>(trim(row.substr(c1 + 1, c2 - c1 - 1)));
    if (!system) throw ParseError(line_no, "unknown code system");
    try {
      table.add(std::string(name), *system, row.substr(c2 + 1));
    } catch (const std::invalid_argument& e) {
      throw ParseError(line_no, e.what());
    }
  }
  if (line_no == 0) throw ParseError(0, "empty code table");
  return table;
}

CodeTable CodeTable::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return from_csv(in);
}

CodeTable CodeTable::defaults() {
  static const CodeTable table = [] {
    std::istringstream in{std::string(kDefaultCodes)};
    return from_csv(in);
  }();
  return table;
}

}  // namespace itf
