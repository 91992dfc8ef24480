#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fairhub {

enum class Severity { error, warning };

std::string_view to_string(Severity s);

/// Where an issue was found. `row` is 1-based and counts the header as row 1;
/// 0 means the issue is not tied to a row (file- or field-level).
struct Location {
  std::string file;
  std::size_t row = 0;
  std::string column;

  friend bool operator==(const Location&, const Location&) = default;
};

struct Issue {
  Severity severity = Severity::error;
  std::string code;
  Location location;
  std::string message;

  friend bool operator==(const Issue&, const Issue&) = default;
};

Issue make_error(std::string code, Location loc, std::string message);
Issue make_warning(std::string code, Location loc, std::string message);

/// Total order: (file, row, column, code, message, severity).
bool issue_less(const Issue& a, const Issue& b);
void sort_issues(std::vector<Issue>& issues);

bool has_errors(const std::vector<Issue>& issues);
std::size_t count_errors(const std::vector<Issue>& issues);

/// A value plus the issues found while producing it. The value is present
/// iff no error-severity issue was recorded; warnings may accompany a value.
template <typename T>
struct Result {
  std::optional<T> value;
  std::vector<Issue> issues;

  bool ok() const { return value.has_value(); }
  explicit operator bool() const { return ok(); }
  T& operator*() { return *value; }
  const T& operator*() const { return *value; }
  T* operator->() { return &*value; }
  const T* operator->() const { return &*value; }

  static Result success(T v, std::vector<Issue> warnings = {}) {
    return Result{std::move(v), std::move(warnings)};
  }
  static Result failure(std::vector<Issue> issues) {
    return Result{std::nullopt, std::move(issues)};
  }
};

/// Builds a Result from a candidate value and collected issues, dropping the
/// value when any issue is an error. Issues are sorted.
template <typename T>
Result<T> finish(T candidate, std::vector<Issue> issues) {
  sort_issues(issues);
  if (has_errors(issues)) return Result<T>::failure(std::move(issues));
  return Result<T>::success(std::move(candidate), std::move(issues));
}

}  // namespace fairhub
