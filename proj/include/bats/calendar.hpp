#pragma once

#include <compare>
#include <string>

namespace bats {

/// Calendar date (proleptic Gregorian). Arithmetic goes through the serial
/// day number so two encodings of the same instant always agree.
struct Date {
  int year = 1970;
  int month = 1;  // 1..12
  int day = 1;    // 1..31

  /// Days since 1970-01-01.
  long serial() const;

  static Date from_serial(long days);

  bool is_valid() const;

  /// Parses "YYYY-MM-DD"; throws std::invalid_argument otherwise.
  static Date parse(const std::string& text);

  std::string to_string() const;

  friend auto operator<=>(const Date& a, const Date& b) {
    return a.serial() <=> b.serial();
  }
  friend bool operator==(const Date& a, const Date& b) {
    return a.year == b.year && a.month == b.month && a.day == b.day;
  }
};

inline long operator-(const Date& a, const Date& b) {
  return a.serial() - b.serial();
}

Date operator+(const Date& d, long days);

}  // namespace bats
