#pragma once

#include <chrono>
#include <compare>
#include <string>
#include <string_view>

namespace itf {

/// Calendar date with day arithmetic. Serialized as ISO-8601 (YYYY-MM-DD).
class Date {
 public:
  Date() = default;
  explicit Date(std::chrono::sys_days days) : days_(days) {}

  /// Throws std::invalid_argument for impossible dates.
  static Date from_ymd(int year, unsigned month, unsigned day);
  /// Strict YYYY-MM-DD. Throws std::invalid_argument.
  static Date parse(std::string_view iso);

  std::string iso() const;
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  long serial() const { return days_.time_since_epoch().count(); }

  Date operator+(long days) const { return Date{days_ + std::chrono::days{days}}; }
  Date operator-(long days) const { return Date{days_ - std::chrono::days{days}}; }
  friend long operator-(Date a, Date b) { return (a.days_ - b.days_).count(); }

  auto operator<=>(const Date&) const = default;

 private:
  std::chrono::sys_days days_{};
};

/// Completed years between `birth` and `at` (birthday not yet reached counts as the prior year).
int age_in_years(Date birth, Date at);

}  // namespace itf
