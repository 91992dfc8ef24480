#include "fairhub/issue.hpp"

#include <algorithm>
#include <tuple>

namespace fairhub {

std::string_view to_string(Severity s) {
  return s == Severity::error ? "error" : "warning";
}

Issue make_error(std::string code, Location loc, std::string message) {
  return Issue{Severity::error, std::move(code), std::move(loc), std::move(message)};
}

Issue make_warning(std::string code, Location loc, std::string message) {
  return Issue{Severity::warning, std::move(code), std::move(loc), std::move(message)};
}

bool issue_less(const Issue& a, const Issue& b) {
  return std::tie(a.location.file, a.location.row, a.location.column, a.code, a.message,
                  a.severity) < std::tie(b.location.file, b.location.row, b.location.column,
                                         b.code, b.message, b.severity);
}

void sort_issues(std::vector<Issue>& issues) {
  std::sort(issues.begin(), issues.end(), issue_less);
}

bool has_errors(const std::vector<Issue>& issues) {
  return std::any_of(issues.begin(), issues.end(),
                     [](const Issue& i) { return i.severity == Severity::error; });
}

std::size_t count_errors(const std::vector<Issue>& issues) {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(), [](const Issue& i) { return i.severity == Severity::error; }));
}

}  // namespace fairhub
