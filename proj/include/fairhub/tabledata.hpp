#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairhub/dictionary.hpp"
#include "fairhub/issue.hpp"

namespace fairhub {

/// Rectangular table of string cells with distinct column names. Cells are
/// stored row-major in one array.
class Table {
 public:
  Table() = default;
  /// Throws std::invalid_argument when column names repeat or when
  /// cells.size() is not a multiple of the header width.
  Table(std::vector<std::string> header, std::vector<std::string> cells);
  static Table from_rows(std::vector<std::string> header,
                         const std::vector<std::vector<std::string>>& rows);

  const std::vector<std::string>& header() const { return header_; }
  std::size_t n_cols() const { return header_.size(); }
  std::size_t n_rows() const { return header_.empty() ? 0 : cells_.size() / header_.size(); }

  std::span<const std::string> row(std::size_t r) const {
    return {cells_.data() + r * n_cols(), n_cols()};
  }
  const std::string& cell(std::size_t r, std::size_t c) const { return cells_[r * n_cols() + c]; }
  std::string& cell(std::size_t r, std::size_t c) { return cells_[r * n_cols() + c]; }
  const std::vector<std::string>& cells() const { return cells_; }

  std::optional<std::size_t> column_index(std::string_view name) const;

  /// Throws std::invalid_argument if the row width differs from the header.
  void append_row(std::vector<std::string> row);

  friend bool operator==(const Table&, const Table&) = default;

 private:
  std::vector<std::string> header_;
  std::vector<std::string> cells_;
};

/// Data row r (0-based) sits on file row r + 2.
inline std::size_t file_row(std::size_t data_row) { return data_row + 2; }

/// Issue codes: DATA_EMPTY, DATA_RAGGED_ROW, DATA_DUP_COLUMN, CSV_*.
Result<Table> parse_table(std::string_view raw, const std::string& file_name = {});
std::string serialize_table(const Table& t);

/// Cells equal to "" or to one of `sentinels` are missing.
struct MissingPolicy {
  std::vector<std::string> sentinels;

  bool is_missing(std::string_view cell) const;
};

struct ConformanceOptions {
  std::string file_name;
  MissingPolicy missing;
};

/// Per column: DATA_UNDECLARED_VARIABLE (error), DATA_MISSING_VARIABLE
/// (warning). Per cell: DATA_REQUIRED_MISSING, DATA_TYPE_MISMATCH,
/// DATA_ENUM_VIOLATION, DATA_OUT_OF_BOUNDS, DATA_PATTERN_MISMATCH. A cell
/// that fails its datatype is not checked further.
std::vector<Issue> validate_against_dictionary(const Table& t, const DataDictionary& d,
                                               const ConformanceOptions& opts = {});

/// True when a non-missing cell conforms to the variable's datatype (for
/// enum variables: is one of its codes).
bool conforms_to_datatype(std::string_view cell, const VariableSpec& v);

struct VariableSummary {
  std::string name;
  std::size_t missing = 0;
  std::optional<double> min;
  std::optional<double> max;
  std::optional<double> mean;

  friend bool operator==(const VariableSummary&, const VariableSummary&) = default;
};

struct SummaryStats {
  std::size_t n_records = 0;
  std::size_t n_variables = 0;
  std::vector<VariableSummary> variables;  // header order

  friend bool operator==(const SummaryStats&, const SummaryStats&) = default;
};

/// Numeric stats are computed for columns the dictionary declares integer or
/// decimal, over their non-missing cells that parse.
SummaryStats summarize(const Table& t, const DataDictionary& d, const MissingPolicy& missing = {});

}  // namespace fairhub
