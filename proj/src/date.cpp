#include "itf/date.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace itf {

Date Date::from_ymd(int year, unsigned month, unsigned day) {
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                        std::chrono::day{day}};
  if (!ymd.ok()) throw std::invalid_argument("invalid calendar date");
  return Date{std::chrono::sys_days{ymd}};
}

Date Date::parse(std::string_view iso) {
  if (iso.size() != 10 || iso[4] != '-' || iso[7] != '-') {
    throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(iso) + "'");
  }
  auto field = [&](std::size_t pos, std::size_t len) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(iso.data() + pos, iso.data() + pos + len, value);
    if (ec != std::errc{} || ptr != iso.data() + pos + len) {
      throw std::invalid_argument("expected YYYY-MM-DD, got '" + std::string(iso) + "'");
    }
    return value;
  };
  return from_ymd(field(0, 4), static_cast<unsigned>(field(5, 2)), static_cast<unsigned>(field(8, 2)));
}

std::string Date::iso() const {
  const auto d = ymd();
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

int age_in_years(Date birth, Date at) {
  const auto b = birth.ymd();
  const auto a = at.ymd();
  int years = static_cast<int>(a.year()) - static_cast<int>(b.year());
  if (a.month() < b.month() || (a.month() == b.month() && a.day() < b.day())) --years;
  return years;
}

}  // namespace itf
