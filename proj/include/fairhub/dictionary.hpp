#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairhub/issue.hpp"

namespace fairhub {

enum class Datatype { integer, decimal, string, date, datetime, boolean, enumeration };

std::string_view to_string(Datatype t);
/// Accepts exactly the seven lowercase tags; "enum" maps to Datatype::enumeration.
std::optional<Datatype> parse_datatype(std::string_view tag);
inline bool is_numeric(Datatype t) { return t == Datatype::integer || t == Datatype::decimal; }

struct EnumerationEntry {
  std::string code;
  std::string label;

  friend bool operator==(const EnumerationEntry&, const EnumerationEntry&) = default;
};

/// One dictionary row. Optional text fields are never engaged with an empty
/// string: an empty cell is the absent value.
struct VariableSpec {
  std::string id;
  std::string label;
  Datatype datatype = Datatype::string;
  std::optional<std::string> units;
  std::vector<EnumerationEntry> enumeration;
  bool required = false;
  std::optional<std::string> pattern;
  std::optional<double> min;
  std::optional<double> max;

  const EnumerationEntry* find_code(std::string_view code) const;

  friend bool operator==(const VariableSpec&, const VariableSpec&) = default;
};

struct DataDictionary {
  std::vector<VariableSpec> variables;
  std::string source_name;

  const VariableSpec* find(std::string_view id) const;

  friend bool operator==(const DataDictionary&, const DataDictionary&) = default;
};

inline constexpr std::string_view kDictionaryHeader =
    "Id,Label,Datatype,Units,Enumeration,Required,Pattern,Min,Max";

/// Issue codes: DICT_BAD_HEADER, DICT_RAGGED_ROW, DICT_EMPTY, DICT_BAD_ID,
/// DICT_DUP_ID, DICT_BAD_DATATYPE, DICT_BAD_ENUM_SYNTAX, DICT_ENUM_REQUIRED,
/// DICT_ENUM_UNEXPECTED, DICT_DUP_ENUM_CODE, DICT_BAD_REQUIRED,
/// DICT_BAD_PATTERN, DICT_BAD_BOUNDS, plus CSV_* from the reader.
/// All issues are collected; the dictionary is returned only when none is an error.
Result<DataDictionary> parse_dictionary(std::string_view raw, const std::string& source_name = {});

/// Invariant check on an already-built dictionary. Variable i is reported at
/// row i + 2 (the header is row 1). Issues are sorted by (row, code).
std::vector<Issue> validate_dictionary(const DataDictionary& d);

std::string serialize_dictionary(const DataDictionary& d);

/// Enumeration cell grammar: `code="label"` pairs joined by "; ". Inside a
/// label a literal quote is doubled. Codes are non-empty runs without
/// whitespace, '=', ';' or '"'.
std::optional<std::vector<EnumerationEntry>> parse_enumeration(std::string_view cell);
std::string format_enumeration(const std::vector<EnumerationEntry>& entries);

bool is_valid_identifier(std::string_view id);

}  // namespace fairhub
