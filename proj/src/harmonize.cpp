#include "fairhub/harmonize.hpp"

#include <set>
#include <unordered_map>
#include <unordered_set>

#include "fairhub/csv.hpp"
#include "json.hpp"

namespace fairhub::harmonize {

using Json = nlohmann::json;

const Cde* Codebook::find(std::string_view name) const {
  for (const auto& c : cdes)
    if (c.name == name) return &c;
  return nullptr;
}

const VariableMapping* MappingSet::find_source(std::string_view source) const {
  for (const auto& m : mappings)
    if (m.source_variable == source) return &m;
  return nullptr;
}

std::string_view to_string(MappingAction a) {
  switch (a) {
    case MappingAction::map: return "map";
    case MappingAction::passthrough: return "passthrough";
    case MappingAction::drop: return "drop";
  }
  return "map";
}

namespace {

std::optional<MappingAction> parse_action(std::string_view s) {
  for (auto a : {MappingAction::map, MappingAction::passthrough, MappingAction::drop})
    if (to_string(a) == s) return a;
  return std::nullopt;
}

std::string str_field(const Json& j, const char* key) {
  auto it = j.find(key);
  return it != j.end() && it->is_string() ? it->get<std::string>() : std::string{};
}

void check_mapping_structure(const MappingSet& m, const std::string& file, std::vector<Issue>& issues) {
  std::unordered_set<std::string> sources;
  std::unordered_set<std::string> targets;
  for (const auto& vm : m.mappings) {
    const Location loc{file, 0, vm.source_variable};
    if (!sources.insert(vm.source_variable).second)
      issues.push_back(make_error("MAP_DUP_SOURCE", loc, "more than one mapping for this source variable"));
    if (vm.action == MappingAction::map) {
      if (vm.target_cde.empty())
        issues.push_back(make_error("MAP_MISSING_TARGET", loc, "action map needs a target CDE"));
      else if (!targets.insert(vm.target_cde).second)
        issues.push_back(make_error("MAP_DUP_TARGET", loc, "CDE '" + vm.target_cde + "' is already a mapping target"));
    }
  }
}

}  // namespace

Result<Codebook> parse_codebook(std::string_view raw, const std::string& file) {
  std::vector<Issue> issues;
  Json j = Json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("categories") || !j["categories"].is_array() ||
      !j.contains("cdes") || !j["cdes"].is_array()) {
    issues.push_back(make_error("CB_BAD_JSON", {file, 0, {}}, "codebook must be an object with categories and cdes arrays"));
    return Result<Codebook>::failure(std::move(issues));
  }
  Codebook cb;
  cb.version = str_field(j, "version");
  std::unordered_set<std::string> categories;
  for (const auto& c : j["categories"]) {
    if (!c.is_string() || c.get<std::string>().empty()) {
      issues.push_back(make_error("CB_BAD_JSON", {file, 0, "categories"}, "category must be a non-empty string"));
      continue;
    }
    auto name = c.get<std::string>();
    if (!categories.insert(name).second)
      issues.push_back(make_error("CB_DUP_CATEGORY", {file, 0, name}, "category listed twice"));
    else
      cb.categories.push_back(std::move(name));
  }
  if (cb.categories.empty())
    issues.push_back(make_error("CB_EMPTY_CATEGORIES", {file, 0, "categories"}, "codebook declares no categories"));

  std::unordered_set<std::string> names;
  for (const auto& e : j["cdes"]) {
    if (!e.is_object()) {
      issues.push_back(make_error("CB_BAD_JSON", {file, 0, "cdes"}, "CDE entry must be an object"));
      continue;
    }
    Cde cde;
    cde.name = str_field(e, "name");
    cde.label = str_field(e, "label");
    cde.category = str_field(e, "category");
    const Location loc{file, 0, cde.name};
    if (!is_valid_identifier(cde.name))
      issues.push_back(make_error("CB_BAD_NAME", loc, "CDE name '" + cde.name + "' is not a valid identifier"));
    else if (!names.insert(cde.name).second)
      issues.push_back(make_error("CB_DUP_NAME", loc, "CDE name repeated"));
    if (!categories.contains(cde.category))
      issues.push_back(make_error("CB_BAD_CATEGORY", loc, "category '" + cde.category + "' is not declared"));
    if (auto t = parse_datatype(str_field(e, "datatype"))) {
      cde.datatype = *t;
    } else {
      issues.push_back(make_error("CB_BAD_DATATYPE", loc, "unknown datatype"));
    }
    if (e.contains("enumeration") && e["enumeration"].is_array()) {
      for (const auto& entry : e["enumeration"])
        cde.enumeration.push_back({str_field(entry, "code"), str_field(entry, "label")});
    }
    if (cde.categorical() && cde.enumeration.empty())
      issues.push_back(make_error("CB_ENUM_REQUIRED", loc, "categorical CDE has no enumeration"));
    cb.cdes.push_back(std::move(cde));
  }
  return finish(std::move(cb), std::move(issues));
}

Result<MappingSet> parse_mapping_set(std::string_view raw, const std::string& file) {
  std::vector<Issue> issues;
  Json j = Json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("mappings") || !j["mappings"].is_array()) {
    issues.push_back(make_error("MAP_BAD_JSON", {file, 0, {}}, "mapping file must be an object with a mappings array"));
    return Result<MappingSet>::failure(std::move(issues));
  }
  MappingSet m;
  m.study = str_field(j, "study");
  m.file = str_field(j, "file");
  for (const auto& e : j["mappings"]) {
    VariableMapping vm;
    vm.source_variable = str_field(e, "source");
    vm.target_cde = str_field(e, "target");
    const std::string action = e.contains("action") ? str_field(e, "action") : "map";
    if (auto a = parse_action(action)) {
      vm.action = *a;
    } else {
      issues.push_back(make_error("MAP_BAD_ACTION", {file, 0, vm.source_variable}, "unknown action '" + action + "'"));
    }
    if (e.contains("value_map")) {
      const auto& vmap = e["value_map"];
      if (!vmap.is_object()) {
        issues.push_back(make_error("MAP_BAD_JSON", {file, 0, vm.source_variable}, "value_map must be an object"));
      } else {
        for (auto it = vmap.begin(); it != vmap.end(); ++it) {
          if (it->is_string()) vm.value_map[it.key()] = it->get<std::string>();
          else issues.push_back(make_error("MAP_BAD_JSON", {file, 0, vm.source_variable}, "value_map targets must be strings"));
        }
      }
    }
    m.mappings.push_back(std::move(vm));
  }
  check_mapping_structure(m, file, issues);
  return finish(std::move(m), std::move(issues));
}

std::string serialize_mapping_set(const MappingSet& m) {
  Json arr = Json::array();
  for (const auto& vm : m.mappings) {
    Json e = {{"source", vm.source_variable}, {"action", to_string(vm.action)}};
    if (!vm.target_cde.empty()) e["target"] = vm.target_cde;
    if (!vm.value_map.empty()) e["value_map"] = vm.value_map;
    arr.push_back(std::move(e));
  }
  Json j = {{"study", m.study}, {"mappings", std::move(arr)}};
  if (!m.file.empty()) j["file"] = m.file;
  return j.dump(2) + "\n";
}

Result<MappingSet> import_mapping_csv(std::string_view raw, std::string study, const std::string& file) {
  auto records = csv::parse(raw, file);
  if (!records) return Result<MappingSet>::failure(std::move(records.issues));
  std::vector<Issue> issues;
  static const std::vector<std::string> kHeader = {"source", "target", "action", "source_code", "target_code"};
  if (records->empty() || !std::equal(records->record(0).begin(), records->record(0).end(),
                                      kHeader.begin(), kHeader.end())) {
    issues.push_back(make_error("MAP_BAD_JSON", {file, 1, {}}, "expected header source,target,action,source_code,target_code"));
    return Result<MappingSet>::failure(std::move(issues));
  }
  MappingSet m;
  m.study = std::move(study);
  std::unordered_map<std::string, std::size_t> by_source;
  for (std::size_t r = 1; r < records->size(); ++r) {
    auto row = records->record(r);
    const Location loc{file, r + 1, row.empty() ? std::string{} : row[0]};
    if (row.size() != kHeader.size()) {
      issues.push_back(make_error("MAP_BAD_JSON", loc, "expected 5 cells"));
      continue;
    }
    auto action = parse_action(row[2].empty() ? "map" : row[2]);
    if (!action) {
      issues.push_back(make_error("MAP_BAD_ACTION", loc, "unknown action '" + row[2] + "'"));
      continue;
    }
    auto [it, inserted] = by_source.emplace(row[0], m.mappings.size());
    if (inserted) m.mappings.push_back({row[0], row[1], {}, *action});
    VariableMapping& vm = m.mappings[it->second];
    if (vm.target_cde != row[1] || vm.action != *action) {
      issues.push_back(make_error("MAP_DUP_SOURCE", loc, "conflicting rows for one source variable"));
      continue;
    }
    if (!row[3].empty()) vm.value_map[row[3]] = row[4];
  }
  check_mapping_structure(m, file, issues);
  return finish(std::move(m), std::move(issues));
}

std::vector<Issue> validate_mappings(const DataDictionary& d, const Codebook& cb, const MappingSet& m) {
  std::vector<Issue> issues;
  const std::string& file = d.source_name;
  check_mapping_structure(m, file, issues);

  for (const auto& vm : m.mappings) {
    const Location loc{file, 0, vm.source_variable};
    const VariableSpec* src = d.find(vm.source_variable);
    if (!src) {
      issues.push_back(make_error("MAP_UNKNOWN_SOURCE", loc, "source variable not in dictionary"));
      continue;
    }
    if (vm.action != MappingAction::map) {
      if (!vm.value_map.empty())
        issues.push_back(make_error("MAP_UNEXPECTED_VALUE_MAP", loc, "value_map only applies to action map"));
      continue;
    }
    const Cde* cde = cb.find(vm.target_cde);
    if (!cde) {
      if (!vm.target_cde.empty())
        issues.push_back(make_error("MAP_UNKNOWN_CDE", loc, "CDE '" + vm.target_cde + "' not in codebook"));
      continue;
    }
    const bool src_cat = src->datatype == Datatype::enumeration;
    if (src_cat != cde->categorical()) {
      issues.push_back(make_error("MAP_TYPE_CONFLICT", loc, "exactly one of source and CDE is categorical"));
      continue;
    }
    if (!src_cat) {
      if (!vm.value_map.empty())
        issues.push_back(make_error("MAP_UNEXPECTED_VALUE_MAP", loc, "value_map given for non-categorical variables"));
      const bool compatible = src->datatype == cde->datatype ||
                              (src->datatype == Datatype::integer && cde->datatype == Datatype::decimal);
      if (!compatible)
        issues.push_back(make_error("MAP_TYPE_CONFLICT", loc,
                                    std::string(to_string(src->datatype)) + " source cannot map to " +
                                        std::string(to_string(cde->datatype)) + " CDE"));
      continue;
    }
    for (const auto& [from, to] : vm.value_map) {
      if (!src->find_code(from))
        issues.push_back(make_error("MAP_BAD_SOURCE_CODE", loc, "source code '" + from + "' not in source enumeration"));
      bool target_ok = false;
      for (const auto& e : cde->enumeration) target_ok = target_ok || e.code == to;
      if (!target_ok)
        issues.push_back(make_error("MAP_BAD_TARGET_CODE", loc, "target code '" + to + "' not in " + cde->name));
    }
    for (const auto& e : src->enumeration)
      if (!vm.value_map.contains(e.code))
        issues.push_back(make_error("MAP_UNCOVERED_VALUE", loc, "source code '" + e.code + "' has no target"));
  }

  std::unordered_map<std::string, std::string> output_names;  // output -> source
  for (const auto& v : d.variables) {
    const VariableMapping* vm = m.find_source(v.id);
    if (!vm)
      issues.push_back(make_warning("MAP_UNMAPPED_VARIABLE", {file, 0, v.id}, "no mapping; variable passes through"));
    if (vm && vm->action == MappingAction::drop) continue;
    const std::string out = vm && vm->action == MappingAction::map ? vm->target_cde : v.id;
    if (out.empty()) continue;
    auto [it, inserted] = output_names.emplace(out, v.id);
    if (!inserted)
      issues.push_back(make_error("MAP_NAME_COLLISION", {file, 0, v.id},
                                  "output column '" + out + "' also produced by '" + it->second + "'"));
  }

  sort_issues(issues);
  return issues;
}

DataDictionary harmonized_dictionary(const DataDictionary& d, const Codebook& cb, const MappingSet& m) {
  DataDictionary out;
  out.source_name = harmonized_file_name(d.source_name);
  for (const auto& v : d.variables) {
    const VariableMapping* vm = m.find_source(v.id);
    if (vm && vm->action == MappingAction::drop) continue;
    if (!vm || vm->action == MappingAction::passthrough) {
      out.variables.push_back(v);
      continue;
    }
    const Cde& cde = *cb.find(vm->target_cde);
    VariableSpec spec;
    spec.id = cde.name;
    spec.label = cde.label;
    spec.datatype = cde.datatype;
    spec.enumeration = cde.enumeration;
    spec.required = v.required;
    if (!cde.categorical()) {
      spec.units = v.units;
      spec.pattern = v.pattern;
      spec.min = v.min;
      spec.max = v.max;
    }
    out.variables.push_back(std::move(spec));
  }
  return out;
}

Result<Harmonized> apply_mappings(const Table& t, const DataDictionary& d, const Codebook& cb,
                                  const MappingSet& m, const ApplyOptions& opts) {
  std::vector<Issue> issues;
  Harmonized out;
  out.dictionary = harmonized_dictionary(d, cb, m);

  for (const auto& v : d.variables) {
    const VariableMapping* vm = m.find_source(v.id);
    if (!vm || vm->action == MappingAction::passthrough) ++out.report.passthrough;
    else if (vm->action == MappingAction::drop) ++out.report.dropped;
    else ++out.report.mapped;
  }

  struct Plan {
    std::size_t source;
    const VariableMapping* remap;  // categorical value translation, else null
  };
  std::vector<Plan> plan;
  std::vector<std::string> header;
  for (std::size_t c = 0; c < t.n_cols(); ++c) {
    const auto& name = t.header()[c];
    const VariableMapping* vm = m.find_source(name);
    if (vm && vm->action == MappingAction::drop) continue;
    if (vm && vm->action == MappingAction::map) {
      const Cde& cde = *cb.find(vm->target_cde);
      header.push_back(cde.name);
      plan.push_back({c, cde.categorical() ? vm : nullptr});
    } else {
      header.push_back(name);
      plan.push_back({c, nullptr});
    }
  }

  std::vector<std::string> cells;
  cells.reserve(t.n_rows() * plan.size());
  const Severity uncovered =
      opts.strictness == Strictness::strict ? Severity::error : Severity::warning;
  for (std::size_t r = 0; r < t.n_rows(); ++r) {
    for (const auto& p : plan) {
      const std::string& cell = t.cell(r, p.source);
      if (!p.remap || opts.missing.is_missing(cell)) {
        cells.push_back(cell);
        continue;
      }
      auto it = p.remap->value_map.find(cell);
      if (it == p.remap->value_map.end()) {
        ++out.report.unmapped_value_incidents;
        issues.push_back(Issue{uncovered, "MAP_RUNTIME_UNCOVERED",
                               {opts.file_name, file_row(r), t.header()[p.source]},
                               "value has no mapping"});
        cells.emplace_back();
        continue;
      }
      ++out.report.values_remapped;
      cells.push_back(it->second);
    }
  }
  out.report.output_variables = header.size();
  std::unordered_set<std::string_view> seen;
  for (const auto& h : header)
    if (!seen.insert(h).second)
      issues.push_back(make_error("MAP_NAME_COLLISION", {opts.file_name, 1, h}, "output column produced twice"));
  if (has_errors(issues)) return finish(std::move(out), std::move(issues));
  out.table = Table(std::move(header), std::move(cells));
  return finish(std::move(out), std::move(issues));
}

std::string harmonized_file_name(std::string_view file_name) {
  const auto dot = file_name.rfind('.');
  if (dot == std::string_view::npos || dot == 0) return std::string(file_name) + "_harmonized";
  return std::string(file_name.substr(0, dot)) + "_harmonized" + std::string(file_name.substr(dot));
}

Result<BundlePair> both_versions(const FileBundle& bundle, const Codebook& cb, const MappingSet& m,
                                 const ApplyOptions& opts) {
  auto issues = validate_mappings(bundle.dictionary, cb, m);
  if (has_errors(issues)) return Result<BundlePair>::failure(std::move(issues));

  ApplyOptions o = opts;
  if (o.file_name.empty()) o.file_name = bundle.file_metadata.file_name;
  auto applied = apply_mappings(bundle.table, bundle.dictionary, cb, m, o);
  issues.insert(issues.end(), applied.issues.begin(), applied.issues.end());
  if (!applied) return finish(BundlePair{}, std::move(issues));

  BundlePair pair;
  pair.original = bundle;
  pair.report = applied->report;
  pair.harmonized.table = std::move(applied->table);
  pair.harmonized.dictionary = std::move(applied->dictionary);
  pair.harmonized.file_metadata = bundle.file_metadata;
  pair.harmonized.file_metadata.file_name = harmonized_file_name(bundle.file_metadata.file_name);
  pair.harmonized.file_metadata.harmonized = true;
  pair.harmonized.file_metadata.summary =
      summarize(pair.harmonized.table, pair.harmonized.dictionary, o.missing);
  return finish(std::move(pair), std::move(issues));
}

}  // namespace fairhub::harmonize
