#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace itf {

/// RFC 4180 quoting: fields containing ',', '"', CR or LF are quoted.
std::string csv_escape(std::string_view field);
std::string csv_row(const std::vector<std::string>& fields);

/// Shortest round-trip decimal form; "NA" for non-finite values.
std::string format_number(double x);
/// Fixed-point with `decimals` places, rounding half away from zero on the decimal value.
std::string format_fixed(double x, int decimals);

/// Header-indexed CSV table.
class CsvTable {
 public:
  /// Throws ParseError on unterminated quotes or ragged rows.
  static CsvTable parse(std::istream& in);
  static CsvTable read(const std::filesystem::path& path);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  bool has_column(std::string_view name) const;
  /// Throws ParseError naming the column when absent.
  const std::string& at(std::size_t row, std::string_view column) const;
  std::optional<std::string> get(std::size_t row, std::string_view column) const;

 private:
  std::vector<std::string> header_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace itf
