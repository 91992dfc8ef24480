#include "fairhub/values.hpp"

#include <charconv>
#include <cstdio>
#include <system_error>

namespace fairhub::values {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!is_digit(c)) return false;
  return true;
}

int two_digits(std::string_view s) { return (s[0] - '0') * 10 + (s[1] - '0'); }

}  // namespace

std::optional<std::int64_t> parse_integer(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t start = 0;
  if (s[0] == '+' || s[0] == '-') start = 1;
  if (!all_digits(s.substr(start))) return std::nullopt;
  std::int64_t v = 0;
  // from_chars rejects a leading '+'
  std::string_view body = s[0] == '+' ? s.substr(1) : s;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (ec != std::errc{} || ptr != body.data() + body.size()) return std::nullopt;
  return v;
}

std::optional<double> parse_decimal(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::size_t i = 0;
  if (s[0] == '+' || s[0] == '-') i = 1;
  std::size_t int_digits = 0;
  while (i < s.size() && is_digit(s[i])) ++i, ++int_digits;
  std::size_t frac_digits = 0;
  if (i < s.size() && s[i] == '.') {
    ++i;
    while (i < s.size() && is_digit(s[i])) ++i, ++frac_digits;
  }
  if (i != s.size() || int_digits + frac_digits == 0) return std::nullopt;
  std::string_view body = s[0] == '+' ? s.substr(1) : s;
  double v = 0;
  auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
  if (ec != std::errc{} || ptr != body.data() + body.size()) return std::nullopt;
  return v;
}

std::optional<std::chrono::year_month_day> parse_date(std::string_view s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
  if (!all_digits(s.substr(0, 4)) || !all_digits(s.substr(5, 2)) || !all_digits(s.substr(8, 2)))
    return std::nullopt;
  const int y = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + two_digits(s.substr(2, 2));
  const std::chrono::year_month_day ymd{std::chrono::year{y},
                                        std::chrono::month{static_cast<unsigned>(two_digits(s.substr(5, 2)))},
                                        std::chrono::day{static_cast<unsigned>(two_digits(s.substr(8, 2)))}};
  if (!ymd.ok()) return std::nullopt;
  return ymd;
}

std::optional<DateTime> parse_datetime(std::string_view s) {
  if (s.size() != 19 || s[10] != 'T' || s[13] != ':' || s[16] != ':') return std::nullopt;
  auto date = parse_date(s.substr(0, 10));
  if (!date) return std::nullopt;
  for (std::size_t pos : {11u, 14u, 17u})
    if (!all_digits(s.substr(pos, 2))) return std::nullopt;
  DateTime dt{*date, two_digits(s.substr(11, 2)), two_digits(s.substr(14, 2)),
              two_digits(s.substr(17, 2))};
  if (dt.hour > 23 || dt.minute > 59 || dt.second > 59) return std::nullopt;
  return dt;
}

std::optional<bool> parse_boolean(std::string_view s) {
  if (s == "1") return true;
  if (s == "0") return false;
  const std::string lower = to_lower(s);
  if (lower == "true") return true;
  if (lower == "false") return false;
  return std::nullopt;
}

std::string format_date(std::chrono::year_month_day d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

std::string format_datetime(const DateTime& dt) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "T%02d:%02d:%02d", dt.hour, dt.minute, dt.second);
  return format_date(dt.date) + buf;
}

std::string format_number(double v) {
  char buf[400];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  if (ec != std::errc{}) return std::to_string(v);
  return std::string(buf, ptr);
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

}  // namespace fairhub::values
