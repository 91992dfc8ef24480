#include "fairhub/tabledata.hpp"

#include <boost/regex.hpp>

#include <limits>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "fairhub/csv.hpp"
#include "fairhub/values.hpp"

namespace fairhub {

Table::Table(std::vector<std::string> header, std::vector<std::string> cells)
    : header_(std::move(header)), cells_(std::move(cells)) {
  std::unordered_set<std::string_view> seen;
  for (const auto& h : header_)
    if (!seen.insert(h).second) throw std::invalid_argument("duplicate column name: " + h);
  if (header_.empty() ? !cells_.empty() : cells_.size() % header_.size() != 0)
    throw std::invalid_argument("cell count does not match header width");
}

Table Table::from_rows(std::vector<std::string> header,
                       const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::string> cells;
  cells.reserve(rows.size() * header.size());
  for (const auto& r : rows) {
    if (r.size() != header.size()) throw std::invalid_argument("ragged row");
    cells.insert(cells.end(), r.begin(), r.end());
  }
  return Table(std::move(header), std::move(cells));
}

std::optional<std::size_t> Table::column_index(std::string_view name) const {
  for (std::size_t c = 0; c < header_.size(); ++c)
    if (header_[c] == name) return c;
  return std::nullopt;
}

void Table::append_row(std::vector<std::string> row) {
  if (row.size() != header_.size()) throw std::invalid_argument("ragged row");
  for (auto& cell : row) cells_.push_back(std::move(cell));
}

Result<Table> parse_table(std::string_view raw, const std::string& file_name) {
  auto records = csv::parse(raw, file_name);
  if (!records) return Result<Table>::failure(std::move(records.issues));
  std::vector<Issue> issues;
  if (records->empty()) {
    issues.push_back(make_error("DATA_EMPTY", {file_name, 0, {}}, "data file is empty"));
    return Result<Table>::failure(std::move(issues));
  }

  const auto header_span = records->record(0);
  std::vector<std::string> header(header_span.begin(), header_span.end());
  std::unordered_set<std::string_view> seen;
  for (const auto& h : header)
    if (!seen.insert(h).second)
      issues.push_back(make_error("DATA_DUP_COLUMN", {file_name, 1, h}, "column '" + h + "' repeated"));

  const std::size_t width = header.size();
  for (std::size_t r = 1; r < records->size(); ++r) {
    if (records->width(r) != width)
      issues.push_back(make_error("DATA_RAGGED_ROW", {file_name, r + 1, {}},
                                  "expected " + std::to_string(width) + " cells, found " +
                                      std::to_string(records->width(r))));
  }
  if (has_errors(issues)) {
    sort_issues(issues);
    return Result<Table>::failure(std::move(issues));
  }

  auto& cells = records->cells();
  cells.erase(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(width));
  return Result<Table>::success(Table(std::move(header), std::move(cells)));
}

std::string serialize_table(const Table& t) {
  std::string out;
  out.reserve(t.cells().size() * 8 + 64);
  csv::append_row(out, t.header());
  for (std::size_t r = 0; r < t.n_rows(); ++r) csv::append_row(out, t.row(r));
  return out;
}

bool MissingPolicy::is_missing(std::string_view cell) const {
  if (cell.empty()) return true;
  for (const auto& s : sentinels)
    if (cell == s) return true;
  return false;
}

bool conforms_to_datatype(std::string_view cell, const VariableSpec& v) {
  switch (v.datatype) {
    case Datatype::integer: return values::parse_integer(cell).has_value();
    case Datatype::decimal: return values::parse_decimal(cell).has_value();
    case Datatype::string: return true;
    case Datatype::date: return values::parse_date(cell).has_value();
    case Datatype::datetime: return values::parse_datetime(cell).has_value();
    case Datatype::boolean: return values::parse_boolean(cell).has_value();
    case Datatype::enumeration: return v.find_code(cell) != nullptr;
  }
  return false;
}

namespace {

std::optional<double> numeric_value(std::string_view cell, Datatype t) {
  if (t == Datatype::integer) {
    if (auto i = values::parse_integer(cell)) return static_cast<double>(*i);
    return std::nullopt;
  }
  return values::parse_decimal(cell);
}

}  // namespace

std::vector<Issue> validate_against_dictionary(const Table& t, const DataDictionary& d,
                                               const ConformanceOptions& opts) {
  std::vector<Issue> issues;
  const std::string& file = opts.file_name;

  struct Column {
    std::size_t index;
    const VariableSpec* spec;
    std::unique_ptr<boost::regex> pattern;
    std::unordered_set<std::string_view> codes;
  };
  std::vector<Column> columns;

  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    const auto& name = t.header()[c];
    const VariableSpec* spec = d.find(name);
    if (!spec) {
      issues.push_back(make_error("DATA_UNDECLARED_VARIABLE", {file, 1, name},
                                  "column '" + name + "' is not declared in the dictionary"));
      continue;
    }
    Column col{c, spec, nullptr, {}};
    if (spec->pattern) col.pattern = std::make_unique<boost::regex>(*spec->pattern);
    for (const auto& e : spec->enumeration) col.codes.insert(e.code);
    columns.push_back(std::move(col));
  }
  for (const auto& v : d.variables) {
    if (!t.column_index(v.id))
      issues.push_back(make_warning("DATA_MISSING_VARIABLE", {file, 1, v.id},
                                    "declared variable '" + v.id + "' is absent from the data"));
  }

  for (const auto& col : columns) {
    const VariableSpec& v = *col.spec;
    const std::string& name = t.header()[col.index];
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const std::string& cell = t.cell(r, col.index);
      const Location loc{file, file_row(r), name};
      if (opts.missing.is_missing(cell)) {
        if (v.required)
          issues.push_back(make_error("DATA_REQUIRED_MISSING", loc, "required value is missing"));
        continue;
      }
      if (v.datatype == Datatype::enumeration) {
        if (!col.codes.contains(cell)) {
          issues.push_back(make_error("DATA_ENUM_VIOLATION", loc, "value is not an allowed code"));
          continue;
        }
      } else if (!conforms_to_datatype(cell, v)) {
        issues.push_back(make_error("DATA_TYPE_MISMATCH", loc,
                                    "value is not a valid " + std::string(to_string(v.datatype))));
        continue;
      }
      if (is_numeric(v.datatype) && (v.min || v.max)) {
        const double x = *numeric_value(cell, v.datatype);
        if ((v.min && x < *v.min) || (v.max && x > *v.max))
          issues.push_back(make_error("DATA_OUT_OF_BOUNDS", loc, "value outside declared bounds"));
      }
      if (col.pattern && !boost::regex_match(cell, *col.pattern))
        issues.push_back(make_error("DATA_PATTERN_MISMATCH", loc, "value does not match pattern"));
    }
  }

  sort_issues(issues);
  return issues;
}

SummaryStats summarize(const Table& t, const DataDictionary& d, const MissingPolicy& missing) {
  SummaryStats s;
  s.n_records = t.n_rows();
  s.n_variables = t.n_cols();
  s.variables.reserve(t.n_cols());
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    VariableSummary vs;
    vs.name = t.header()[c];
    const VariableSpec* spec = d.find(vs.name);
    const bool numeric = spec && is_numeric(spec->datatype);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0;
    std::size_t count = 0;
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      const std::string& cell = t.cell(r, c);
      if (missing.is_missing(cell)) {
        ++vs.missing;
        continue;
      }
      if (!numeric) continue;
      if (auto x = numeric_value(cell, spec->datatype)) {
        lo = std::min(lo, *x);
        hi = std::max(hi, *x);
        sum += *x;
        ++count;
      }
    }
    if (count > 0) {
      vs.min = lo;
      vs.max = hi;
      vs.mean = sum / static_cast<double>(count);
    }
    s.variables.push_back(std::move(vs));
  }
  return s;
}

}  // namespace fairhub
