#include "fairhub/dictionary.hpp"

#include <boost/regex.hpp>

#include <algorithm>
#include <array>
#include <unordered_map>
#include <unordered_set>

#include "fairhub/csv.hpp"
#include "fairhub/values.hpp"

namespace fairhub {

namespace {

constexpr std::array<std::string_view, 9> kColumns = {
    "Id", "Label", "Datatype", "Units", "Enumeration", "Required", "Pattern", "Min", "Max"};

bool is_code_char(char c) {
  return c != '=' && c != ';' && c != '"' && c != ' ' && c != '\t' && c != '\r' && c != '\n';
}

std::optional<std::string> optional_text(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return cell;
}

/// Checks that depend on fields parsed successfully. `typed` is false for
/// rows whose datatype could not be read; those skip datatype-dependent rules.
void check_variables(const std::vector<VariableSpec>& vars, const std::vector<bool>& typed,
                     const std::vector<std::size_t>& rows, const std::string& file,
                     std::vector<Issue>& issues) {
  std::unordered_map<std::string, std::size_t> first_row;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const VariableSpec& v = vars[i];
    const std::size_t row = rows[i];
    const Location loc{file, row, v.id};

    if (!is_valid_identifier(v.id)) {
      issues.push_back(make_error("DICT_BAD_ID", loc, "variable id '" + v.id + "' is not a valid identifier"));
    } else if (auto [it, inserted] = first_row.emplace(v.id, row); !inserted) {
      issues.push_back(make_error("DICT_DUP_ID", loc,
                                  "variable id '" + v.id + "' already defined at row " +
                                      std::to_string(it->second)));
    }

    if (v.pattern) {
      try {
        boost::regex re(*v.pattern);
      } catch (const boost::regex_error& e) {
        issues.push_back(make_error("DICT_BAD_PATTERN", loc, std::string("pattern does not compile: ") + e.what()));
      }
    }

    if (!typed[i]) continue;

    if (v.datatype == Datatype::enumeration) {
      if (v.enumeration.empty())
        issues.push_back(make_error("DICT_ENUM_REQUIRED", loc, "enum variable has no enumeration"));
      std::unordered_set<std::string_view> codes;
      for (const auto& e : v.enumeration) {
        if (!codes.insert(e.code).second)
          issues.push_back(make_error("DICT_DUP_ENUM_CODE", loc, "enumeration code '" + e.code + "' repeated"));
      }
    } else if (!v.enumeration.empty()) {
      issues.push_back(make_error("DICT_ENUM_UNEXPECTED", loc,
                                  "enumeration given for datatype " + std::string(to_string(v.datatype))));
    }

    if (v.min || v.max) {
      if (!is_numeric(v.datatype)) {
        issues.push_back(make_error("DICT_BAD_BOUNDS", loc, "bounds are only allowed on integer or decimal variables"));
      } else if (v.min && v.max && *v.min > *v.max) {
        issues.push_back(make_error("DICT_BAD_BOUNDS", loc, "min exceeds max"));
      }
    }
  }
}

}  // namespace

std::string_view to_string(Datatype t) {
  switch (t) {
    case Datatype::integer: return "integer";
    case Datatype::decimal: return "decimal";
    case Datatype::string: return "string";
    case Datatype::date: return "date";
    case Datatype::datetime: return "datetime";
    case Datatype::boolean: return "boolean";
    case Datatype::enumeration: return "enum";
  }
  return "string";
}

std::optional<Datatype> parse_datatype(std::string_view tag) {
  for (auto t : {Datatype::integer, Datatype::decimal, Datatype::string, Datatype::date,
                 Datatype::datetime, Datatype::boolean, Datatype::enumeration})
    if (to_string(t) == tag) return t;
  return std::nullopt;
}

const EnumerationEntry* VariableSpec::find_code(std::string_view code) const {
  for (const auto& e : enumeration)
    if (e.code == code) return &e;
  return nullptr;
}

const VariableSpec* DataDictionary::find(std::string_view id) const {
  for (const auto& v : variables)
    if (v.id == id) return &v;
  return nullptr;
}

bool is_valid_identifier(std::string_view id) {
  if (id.empty()) return false;
  auto alpha = [](char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_'; };
  if (!alpha(id[0])) return false;
  for (char c : id.substr(1))
    if (!alpha(c) && !(c >= '0' && c <= '9')) return false;
  return true;
}

std::optional<std::vector<EnumerationEntry>> parse_enumeration(std::string_view cell) {
  std::vector<EnumerationEntry> out;
  std::size_t i = 0;
  const std::size_t n = cell.size();
  auto skip_ws = [&] {
    while (i < n && (cell[i] == ' ' || cell[i] == '\t')) ++i;
  };
  skip_ws();
  if (i == n) return out;
  while (true) {
    skip_ws();
    const std::size_t code_start = i;
    while (i < n && is_code_char(cell[i])) ++i;
    if (i == code_start) return std::nullopt;
    EnumerationEntry entry;
    entry.code = std::string(cell.substr(code_start, i - code_start));
    if (i >= n || cell[i] != '=') return std::nullopt;
    ++i;
    if (i >= n || cell[i] != '"') return std::nullopt;
    ++i;
    bool closed = false;
    while (i < n) {
      if (cell[i] == '"') {
        if (i + 1 < n && cell[i + 1] == '"') {
          entry.label.push_back('"');
          i += 2;
          continue;
        }
        ++i;
        closed = true;
        break;
      }
      entry.label.push_back(cell[i++]);
    }
    if (!closed || entry.label.empty()) return std::nullopt;
    out.push_back(std::move(entry));
    skip_ws();
    if (i == n) return out;
    if (cell[i] != ';') return std::nullopt;
    ++i;
    skip_ws();
    if (i == n) return std::nullopt;  // dangling separator
  }
}

std::string format_enumeration(const std::vector<EnumerationEntry>& entries) {
  std::string out;
  for (std::size_t k = 0; k < entries.size(); ++k) {
    if (k) out += "; ";
    out += entries[k].code;
    out += "=\"";
    for (char c : entries[k].label) {
      if (c == '"') out.push_back('"');
      out.push_back(c);
    }
    out.push_back('"');
  }
  return out;
}

Result<DataDictionary> parse_dictionary(std::string_view raw, const std::string& source_name) {
  auto records = csv::parse(raw, source_name);
  if (!records) return Result<DataDictionary>::failure(std::move(records.issues));

  std::vector<Issue> issues;
  const Location file_loc{source_name, 1, {}};
  if (records->empty()) {
    issues.push_back(make_error("DICT_EMPTY", {source_name, 0, {}}, "dictionary file is empty"));
    return Result<DataDictionary>::failure(std::move(issues));
  }

  const auto header = records->record(0);
  bool header_ok = header.size() == kColumns.size();
  for (std::size_t k = 0; header_ok && k < kColumns.size(); ++k) header_ok = header[k] == kColumns[k];
  if (!header_ok) {
    issues.push_back(make_error("DICT_BAD_HEADER", file_loc,
                                "expected header '" + std::string(kDictionaryHeader) + "'"));
    return Result<DataDictionary>::failure(std::move(issues));
  }

  DataDictionary dict;
  dict.source_name = source_name;
  std::vector<bool> typed;
  std::vector<std::size_t> rows;  // physical record index of each variable

  for (std::size_t r = 1; r < records->size(); ++r) {
    const auto cells = records->record(r);
    const std::size_t row = r + 1;
    if (cells.size() != kColumns.size()) {
      issues.push_back(make_error("DICT_RAGGED_ROW", {source_name, row, {}},
                                  "expected 9 cells, found " + std::to_string(cells.size())));
      continue;
    }
    VariableSpec v;
    v.id = cells[0];
    v.label = cells[1];
    const Location loc{source_name, row, v.id};

    bool ok_type = true;
    if (auto t = parse_datatype(cells[2])) {
      v.datatype = *t;
    } else {
      ok_type = false;
      issues.push_back(make_error("DICT_BAD_DATATYPE", loc, "unknown datatype '" + cells[2] + "'"));
    }
    v.units = optional_text(cells[3]);
    if (auto e = parse_enumeration(cells[4])) {
      v.enumeration = std::move(*e);
    } else {
      issues.push_back(make_error("DICT_BAD_ENUM_SYNTAX", loc, "malformed enumeration cell"));
    }
    const std::string req = values::to_lower(cells[5]);
    if (req == "true") {
      v.required = true;
    } else if (!req.empty() && req != "false") {
      issues.push_back(make_error("DICT_BAD_REQUIRED", loc, "Required must be TRUE, FALSE or empty"));
    }
    v.pattern = optional_text(cells[6]);
    for (int b = 0; b < 2; ++b) {
      const std::string& cell = cells[7 + b];
      if (cell.empty()) continue;
      if (auto num = values::parse_decimal(cell)) {
        (b == 0 ? v.min : v.max) = *num;
      } else {
        issues.push_back(make_error("DICT_BAD_BOUNDS", loc,
                                    std::string(b == 0 ? "Min" : "Max") + " is not a number"));
      }
    }
    dict.variables.push_back(std::move(v));
    typed.push_back(ok_type);
    rows.push_back(row);
  }

  if (dict.variables.empty() && !has_errors(issues))
    issues.push_back(make_error("DICT_EMPTY", file_loc, "dictionary defines no variables"));

  check_variables(dict.variables, typed, rows, source_name, issues);

  return finish(std::move(dict), std::move(issues));
}

std::vector<Issue> validate_dictionary(const DataDictionary& d) {
  std::vector<Issue> issues;
  if (d.variables.empty())
    issues.push_back(make_error("DICT_EMPTY", {d.source_name, 1, {}}, "dictionary defines no variables"));
  for (std::size_t i = 0; i < d.variables.size(); ++i) {
    const auto& v = d.variables[i];
    const Location loc{d.source_name, i + 2, v.id};
    for (const auto& e : v.enumeration) {
      if (e.code.empty() || e.label.empty() ||
          !std::all_of(e.code.begin(), e.code.end(), is_code_char)) {
        issues.push_back(make_error("DICT_BAD_ENUM_SYNTAX", loc, "enumeration entry cannot be serialized"));
        break;
      }
    }
  }
  std::vector<std::size_t> rows(d.variables.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i + 2;
  check_variables(d.variables, std::vector<bool>(d.variables.size(), true), rows, d.source_name,
                  issues);
  sort_issues(issues);
  return issues;
}

std::string serialize_dictionary(const DataDictionary& d) {
  std::string out(kDictionaryHeader);
  out.push_back('\n');
  std::vector<std::string> row(kColumns.size());
  for (const auto& v : d.variables) {
    row[0] = v.id;
    row[1] = v.label;
    row[2] = std::string(to_string(v.datatype));
    row[3] = v.units.value_or("");
    row[4] = format_enumeration(v.enumeration);
    row[5] = v.required ? "TRUE" : "FALSE";
    row[6] = v.pattern.value_or("");
    row[7] = v.min ? values::format_number(*v.min) : "";
    row[8] = v.max ? values::format_number(*v.max) : "";
    csv::append_row(out, row);
  }
  return out;
}

}  // namespace fairhub
