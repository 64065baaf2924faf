#include "bats/calendar.hpp"

#include <charconv>
#include <cstdio>
#include <stdexcept>

namespace bats {

namespace {

// Civil <-> serial day conversions (proleptic Gregorian, epoch 1970-01-01).
long days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  long era = (y >= 0 ? y : y - 399) / 400;
  unsigned yoe = static_cast<unsigned>(y - era * 400);
  unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

void civil_from_days(long z, int& y, int& m, int& d) {
  z += 719468;
  long era = (z >= 0 ? z : z - 146096) / 146097;
  unsigned doe = static_cast<unsigned>(z - era * 146097);
  unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  long yr = static_cast<long>(yoe) + era * 400;
  unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yr + (m <= 2));
}

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
  static const int n[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (m == 2 && is_leap(y)) return 29;
  return n[m - 1];
}

}  // namespace

long Date::serial() const { return days_from_civil(year, month, day); }

Date Date::from_serial(long days) {
  Date d;
  civil_from_days(days, d.year, d.month, d.day);
  return d;
}

bool Date::is_valid() const {
  return month >= 1 && month <= 12 && day >= 1 && day <= days_in_month(year, month);
}

Date Date::parse(const std::string& text) {
  Date d;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-')
    throw std::invalid_argument("bad date '" + text + "', expected YYYY-MM-DD");
  auto num = [&](int lo, int hi, int& out) {
    auto res = std::from_chars(text.data() + lo, text.data() + hi, out);
    if (res.ec != std::errc() || res.ptr != text.data() + hi)
      throw std::invalid_argument("bad date '" + text + "', expected YYYY-MM-DD");
  };
  num(0, 4, d.year);
  num(5, 7, d.month);
  num(8, 10, d.day);
  if (!d.is_valid()) throw std::invalid_argument("invalid calendar date '" + text + "'");
  return d;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02d", year, month, day);
  return buf;
}

Date operator+(const Date& d, long days) { return Date::from_serial(d.serial() + days); }

}  // namespace bats
