#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace fairhub::values {

// Cell-level syntax shared by the dictionary, conformance checks and deid.
//   integer   [+-]?[0-9]+ (fits int64)
//   decimal   [+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+), period radix, no exponent
//   date      YYYY-MM-DD, proleptic Gregorian
//   datetime  YYYY-MM-DDThh:mm:ss
//   boolean   true/false (any case) or 0/1

std::optional<std::int64_t> parse_integer(std::string_view s);
std::optional<double> parse_decimal(std::string_view s);
std::optional<std::chrono::year_month_day> parse_date(std::string_view s);

struct DateTime {
  std::chrono::year_month_day date;
  int hour = 0;
  int minute = 0;
  int second = 0;
};
std::optional<DateTime> parse_datetime(std::string_view s);
std::optional<bool> parse_boolean(std::string_view s);

std::string format_date(std::chrono::year_month_day d);
std::string format_datetime(const DateTime& dt);

/// Shortest decimal text that parses back to exactly `v`.
std::string format_number(double v);

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);

}  // namespace fairhub::values
