#include "itf/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "itf/errors.hpp"

namespace itf {

std::string csv_escape(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string csv_row(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out.push_back(',');
    out += csv_escape(fields[i]);
  }
  return out;
}

std::string format_number(double x) {
  if (!std::isfinite(x)) return "NA";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), end);
}

std::string format_fixed(double x, int decimals) {
  if (!std::isfinite(x)) return "NA";
  // Round on the shortest decimal representation so 46.85 prints as 46.9, not 46.8.
  const std::string shortest = format_number(std::fabs(x));
  std::string digits;
  int point = -1;
  int exponent = 0;
  for (std::size_t i = 0; i < shortest.size(); ++i) {
    const char c = shortest[i];
    if (c == '.') {
      point = static_cast<int>(digits.size());
    } else if (c == 'e' || c == 'E') {
      exponent = std::stoi(shortest.substr(i + 1));
      break;
    } else {
      digits.push_back(c);
    }
  }
  if (point < 0) point = static_cast<int>(digits.size());
  point += exponent;
  // digits with the decimal point after `point` digits; pad to the rounding position.
  while (point < 1) {
    digits.insert(digits.begin(), '0');
    ++point;
  }
  const int keep = point + decimals;
  while (static_cast<int>(digits.size()) < keep + 1) digits.push_back('0');
  const bool round_up = digits[static_cast<std::size_t>(keep)] >= '5';
  digits.resize(static_cast<std::size_t>(keep));
  if (round_up) {
    int i = keep - 1;
    while (i >= 0 && digits[static_cast<std::size_t>(i)] == '9') digits[static_cast<std::size_t>(i--)] = '0';
    if (i < 0) {
      digits.insert(digits.begin(), '1');
      ++point;
    } else {
      ++digits[static_cast<std::size_t>(i)];
    }
  }
  std::string out = digits.substr(0, static_cast<std::size_t>(point));
  if (decimals > 0) out += "." + digits.substr(static_cast<std::size_t>(point));
  const bool zero = out.find_first_not_of("0.") == std::string::npos;
  if (x < 0 && !zero) out.insert(out.begin(), '-');
  return out;
}

CsvTable CsvTable::parse(std::istream& in) {
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();

  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t line = 1;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      record.push_back(std::move(field));
      field.clear();
      field_started = false;
      records.push_back(std::move(record));
      record.clear();
      ++line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (quoted) throw ParseError(line, "unterminated quoted field");
  if (field_started || !record.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }

  CsvTable t;
  if (records.empty()) throw ParseError(0, "empty CSV");
  t.header_ = std::move(records.front());
  for (std::size_t i = 0; i < t.header_.size(); ++i) t.index_.emplace(t.header_[i], i);
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() == 1 && records[r][0].empty()) continue;
    if (records[r].size() != t.header_.size()) {
      throw ParseError(r + 1, "expected " + std::to_string(t.header_.size()) + " fields, found " +
                                  std::to_string(records[r].size()));
    }
    t.rows_.push_back(std::move(records[r]));
  }
  return t;
}

CsvTable CsvTable::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse(in);
}

bool CsvTable::has_column(std::string_view name) const { return index_.find(name) != index_.end(); }

const std::string& CsvTable::at(std::size_t row, std::string_view column) const {
  auto it = index_.find(column);
  if (it == index_.end()) throw ParseError(0, "missing column '" + std::string(column) + "'");
  return rows_.at(row)[it->second];
}

std::optional<std::string> CsvTable::get(std::size_t row, std::string_view column) const {
  auto it = index_.find(column);
  if (it == index_.end()) return std::nullopt;
  return rows_.at(row)[it->second];
}

}  // namespace itf
