#pragma once

#include <chrono>
#include <string>
#include <string_view>

namespace vegrisk {

/// Civil calendar day. No time of day, no time zone.
using Date = std::chrono::sys_days;

/// Parses a strict ISO-8601 calendar date (YYYY-MM-DD). Throws ValidationError.
Date parse_date(std::string_view text);

std::string format_date(Date date);

Date make_date(int year, unsigned month, unsigned day);

int year_of(Date date);
unsigned month_of(Date date);
unsigned day_of(Date date);

inline bool is_leap_year(int year) { return std::chrono::year{year}.is_leap(); }

/// Inclusive span of calendar days.
struct DateRange {
  Date first;
  Date last;

  [[nodiscard]] std::size_t days() const {
    return last < first ? 0 : static_cast<std::size_t>((last - first).count()) + 1;
  }
  [[nodiscard]] bool contains(Date d) const { return first <= d && d <= last; }
  bool operator==(const DateRange&) const = default;
};

}  // namespace vegrisk
