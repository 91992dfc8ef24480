#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairhub/bundle.hpp"
#include "fairhub/dictionary.hpp"
#include "fairhub/issue.hpp"
#include "fairhub/tabledata.hpp"

namespace fairhub::harmonize {

/// A common data element: a standard variable with its allowed responses.
struct Cde {
  std::string name;
  std::string label;
  std::string category;
  Datatype datatype = Datatype::string;
  std::vector<EnumerationEntry> enumeration;

  bool categorical() const { return datatype == Datatype::enumeration; }
};

struct Codebook {
  std::string version;
  std::vector<std::string> categories;
  std::vector<Cde> cdes;

  const Cde* find(std::string_view name) const;
};

/// JSON: {"version", "categories": [...], "cdes": [{"name", "label",
/// "category", "datatype", "enumeration": [{"code", "label"}]}]}.
/// Issue codes: CB_BAD_JSON, CB_EMPTY_CATEGORIES, CB_DUP_CATEGORY,
/// CB_DUP_NAME, CB_BAD_NAME, CB_BAD_CATEGORY, CB_BAD_DATATYPE,
/// CB_ENUM_REQUIRED.
Result<Codebook> parse_codebook(std::string_view raw, const std::string& file = {});

enum class MappingAction { map, passthrough, drop };
std::string_view to_string(MappingAction a);

struct VariableMapping {
  std::string source_variable;
  std::string target_cde;  // empty unless action == map
  std::map<std::string, std::string> value_map;
  MappingAction action = MappingAction::map;
};

struct MappingSet {
  std::string study;  // "*" applies to any study
  std::string file;   // optional: narrows the set to one bundle
  std::vector<VariableMapping> mappings;

  const VariableMapping* find_source(std::string_view source) const;
};

/// JSON: {"study", "file"?, "mappings": [{"source", "target"?, "action",
/// "value_map"?: {src: dst}}]}. Issue codes: MAP_BAD_JSON, MAP_BAD_ACTION,
/// MAP_MISSING_TARGET, MAP_DUP_SOURCE, MAP_DUP_TARGET.
Result<MappingSet> parse_mapping_set(std::string_view raw, const std::string& file = {});
std::string serialize_mapping_set(const MappingSet& m);

/// Spreadsheet import: header `source,target,action,source_code,target_code`,
/// one row per value pair; rows sharing a source are merged.
Result<MappingSet> import_mapping_csv(std::string_view raw, std::string study,
                                      const std::string& file = {});

/// Errors: MAP_UNKNOWN_SOURCE, MAP_UNKNOWN_CDE, MAP_BAD_SOURCE_CODE,
/// MAP_BAD_TARGET_CODE, MAP_UNCOVERED_VALUE, MAP_TYPE_CONFLICT,
/// MAP_UNEXPECTED_VALUE_MAP, MAP_NAME_COLLISION. Warning:
/// MAP_UNMAPPED_VARIABLE for dictionary variables without a mapping
/// (they pass through).
std::vector<Issue> validate_mappings(const DataDictionary& d, const Codebook& cb,
                                     const MappingSet& m);

struct HarmonizationReport {
  std::size_t mapped = 0;
  std::size_t passthrough = 0;
  std::size_t dropped = 0;
  std::size_t values_remapped = 0;
  std::size_t unmapped_value_incidents = 0;
  std::size_t output_variables = 0;
};

enum class Strictness { strict, lenient };

struct ApplyOptions {
  Strictness strictness = Strictness::strict;
  MissingPolicy missing;
  std::string file_name;
};

struct Harmonized {
  Table table;
  DataDictionary dictionary;
  HarmonizationReport report;
};

/// MAP_RUNTIME_UNCOVERED per offending cell: an error in strict mode, a
/// warning (cell written as missing) in lenient mode.
Result<Harmonized> apply_mappings(const Table& t, const DataDictionary& d, const Codebook& cb,
                                  const MappingSet& m, const ApplyOptions& opts = {});

DataDictionary harmonized_dictionary(const DataDictionary& d, const Codebook& cb,
                                     const MappingSet& m);

/// "data.csv" -> "data_harmonized.csv".
std::string harmonized_file_name(std::string_view file_name);

struct BundlePair {
  FileBundle original;
  FileBundle harmonized;
  HarmonizationReport report;
};

/// Runs validate_mappings then apply_mappings; the original is copied, never
/// modified. Harmonized file metadata is flagged, renamed and re-summarized.
Result<BundlePair> both_versions(const FileBundle& bundle, const Codebook& cb,
                                 const MappingSet& m, const ApplyOptions& opts = {});

}  // namespace fairhub::harmonize
