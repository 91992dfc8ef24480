#include "fairhub/metadata.hpp"

#include <boost/regex.hpp>
#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <unordered_set>

#include "fairhub/values.hpp"

namespace fairhub {

// ---------------------------------------------------------------------------
// terms

bool is_absolute_iri(std::string_view iri) {
  const auto colon = iri.find(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == iri.size()) return false;
  auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); };
  if (!alpha(iri[0])) return false;
  for (char c : iri.substr(0, colon))
    if (!alpha(c) && !(c >= '0' && c <= '9') && c != '+' && c != '-' && c != '.') return false;
  for (char c : iri)
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '<' || c == '>' || c == '"') return false;
  return true;
}

const OntologyTerm* TermRegistry::resolve(std::string_view iri) const {
  auto it = terms_.find(std::string(iri));
  return it == terms_.end() ? nullptr : &it->second;
}

Result<TermRegistry> load_term_registry(std::string_view raw, const std::string& file) {
  TermRegistry reg;
  std::vector<Issue> issues;
  std::size_t line_no = 0;
  while (!raw.empty()) {
    ++line_no;
    const auto nl = raw.find('\n');
    std::string_view line = values::trim(raw.substr(0, nl));
    raw.remove_prefix(nl == std::string_view::npos ? raw.size() : nl + 1);
    if (line.empty()) continue;
    const Location loc{file, line_no, {}};
    Json j = Json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("iri") || !j["iri"].is_string()) {
      issues.push_back(make_error("TERM_BAD_JSON", loc, "line is not a term object"));
      continue;
    }
    OntologyTerm t;
    t.iri = j["iri"].get<std::string>();
    t.label = j.value("label", "");
    t.source = j.value("source", "");
    if (!is_absolute_iri(t.iri)) {
      issues.push_back(make_error("TERM_BAD_IRI", {file, line_no, t.iri}, "IRI is not absolute"));
      continue;
    }
    std::string key = t.iri;
    if (!reg.terms_.emplace(std::move(key), std::move(t)).second)
      issues.push_back(make_error("TERM_DUP_IRI", {file, line_no, j["iri"].get<std::string>()}, "IRI already registered"));
  }
  return finish(std::move(reg), std::move(issues));
}

// ---------------------------------------------------------------------------
// templates

std::string_view to_string(FieldKind k) {
  switch (k) {
    case FieldKind::text: return "text";
    case FieldKind::integer: return "integer";
    case FieldKind::date: return "date";
    case FieldKind::boolean: return "boolean";
    case FieldKind::controlled: return "controlled";
    case FieldKind::term: return "term";
    case FieldKind::list: return "list";
  }
  return "text";
}

std::optional<FieldKind> parse_field_kind(std::string_view s) {
  for (auto k : {FieldKind::text, FieldKind::integer, FieldKind::date, FieldKind::boolean,
                 FieldKind::controlled, FieldKind::term, FieldKind::list})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

const FieldSpec* Template::find(std::string_view field) const {
  for (const auto& f : fields)
    if (f.name == field) return &f;
  return nullptr;
}

namespace {

std::vector<std::string> string_list(const Json& j, const char* key) {
  std::vector<std::string> out;
  if (auto it = j.find(key); it != j.end() && it->is_array())
    for (const auto& v : *it)
      if (v.is_string()) out.push_back(v.get<std::string>());
  return out;
}

std::optional<ValueSpec> parse_value_spec(const Json& j, bool allow_list, const Location& loc,
                                          std::vector<Issue>& issues) {
  ValueSpec v;
  const std::string kind = j.value("kind", "");
  auto k = parse_field_kind(kind);
  if (!k || (!allow_list && *k == FieldKind::list)) {
    issues.push_back(make_error("TPL_BAD_KIND", loc, "unsupported kind '" + kind + "'"));
    return std::nullopt;
  }
  v.kind = *k;
  v.values = string_list(j, "values");
  v.sources = string_list(j, "sources");
  if (j.contains("pattern") && j["pattern"].is_string()) {
    v.pattern = j["pattern"].get<std::string>();
    try {
      boost::regex re(*v.pattern);
    } catch (const boost::regex_error&) {
      issues.push_back(make_error("TPL_BAD_PATTERN", loc, "pattern does not compile"));
    }
  }
  if (j.contains("min") && j["min"].is_number_integer()) v.min = j["min"].get<long long>();
  if (v.kind == FieldKind::controlled && v.values.empty())
    issues.push_back(make_error("TPL_EMPTY_VALUES", loc, "controlled field without values"));
  if (v.kind == FieldKind::term && v.sources.empty())
    issues.push_back(make_error("TPL_EMPTY_SOURCES", loc, "term field without sources"));
  return v;
}

}  // namespace

Result<Template> parse_template(std::string_view raw, const std::string& file) {
  std::vector<Issue> issues;
  Json j = Json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("fields") || !j["fields"].is_array()) {
    issues.push_back(make_error("TPL_BAD_JSON", {file, 0, {}}, "template must be an object with a fields array"));
    return Result<Template>::failure(std::move(issues));
  }
  Template tpl;
  tpl.name = j.value("name", "");
  tpl.version = j.value("version", "");
  tpl.system_fields = string_list(j, "system_fields");
  std::unordered_set<std::string> names;
  for (const auto& f : j["fields"]) {
    FieldSpec spec;
    spec.name = f.value("name", "");
    spec.required = f.value("required", false);
    const Location loc{file, 0, spec.name};
    if (spec.name.empty() || !names.insert(spec.name).second) {
      issues.push_back(make_error("TPL_DUP_FIELD", loc, "field name empty or repeated"));
      continue;
    }
    auto v = parse_value_spec(f, true, loc, issues);
    if (!v) continue;
    spec.value = std::move(*v);
    if (spec.value.kind == FieldKind::list) {
      if (!f.contains("item") || !f["item"].is_object()) {
        issues.push_back(make_error("TPL_BAD_KIND", loc, "list field without item spec"));
        continue;
      }
      spec.item = parse_value_spec(f["item"], false, loc, issues);
      if (!spec.item) continue;
    }
    tpl.fields.push_back(std::move(spec));
  }

  std::unordered_map<std::string, int> membership;
  if (j.contains("sections") && j["sections"].is_array()) {
    for (const auto& s : j["sections"]) {
      Section sec{s.value("name", ""), string_list(s, "fields")};
      for (const auto& f : sec.fields) {
        if (!names.contains(f))
          issues.push_back(make_error("TPL_BAD_SECTION", {file, 0, f}, "section '" + sec.name + "' names an unknown field"));
        ++membership[f];
      }
      tpl.sections.push_back(std::move(sec));
    }
  }
  for (const auto& f : tpl.fields)
    if (membership[f.name] != 1)
      issues.push_back(make_error("TPL_BAD_SECTION", {file, 0, f.name}, "field must belong to exactly one section"));
  return finish(std::move(tpl), std::move(issues));
}

// ---------------------------------------------------------------------------
// validation

namespace {

bool empty_value(const Json& v) {
  return v.is_null() || (v.is_string() && v.get_ref<const std::string&>().empty()) ||
         (v.is_array() && v.empty());
}

void check_value(const Json& v, const ValueSpec& spec, const std::string& where,
                 const TermResolver& terms, const std::string& file, std::vector<Issue>& issues) {
  const Location loc{file, 0, where};
  auto bad_kind = [&] {
    issues.push_back(make_error("META_BAD_KIND", loc, "expected " + std::string(to_string(spec.kind))));
  };
  switch (spec.kind) {
    case FieldKind::text:
      if (!v.is_string()) return bad_kind();
      if (spec.pattern && !boost::regex_match(v.get<std::string>(), boost::regex(*spec.pattern)))
        issues.push_back(make_error("META_BAD_VALUE", loc, "value does not match " + *spec.pattern));
      return;
    case FieldKind::integer:
      if (!v.is_number_integer()) return bad_kind();
      if (spec.min && v.get<long long>() < *spec.min)
        issues.push_back(make_error("META_BAD_VALUE", loc, "value below minimum " + std::to_string(*spec.min)));
      return;
    case FieldKind::date:
      if (!v.is_string()) return bad_kind();
      if (!values::parse_date(v.get<std::string>()))
        issues.push_back(make_error("META_BAD_VALUE", loc, "not a valid YYYY-MM-DD date"));
      return;
    case FieldKind::boolean:
      if (!v.is_boolean()) return bad_kind();
      return;
    case FieldKind::controlled:
      if (!v.is_string()) return bad_kind();
      if (std::find(spec.values.begin(), spec.values.end(), v.get<std::string>()) == spec.values.end())
        issues.push_back(make_error("META_BAD_VALUE", loc, "'" + v.get<std::string>() + "' is not an allowed value"));
      return;
    case FieldKind::term: {
      if (!v.is_object() || !v.contains("iri") || !v["iri"].is_string()) return bad_kind();
      const auto iri = v["iri"].get<std::string>();
      const OntologyTerm* t = terms.resolve(iri);
      if (!t) {
        issues.push_back(make_error("META_UNRESOLVED_TERM", loc, "term " + iri + " is not in the registry"));
      } else if (std::find(spec.sources.begin(), spec.sources.end(), t->source) == spec.sources.end()) {
        issues.push_back(make_error("META_BAD_VALUE", loc, "term source " + t->source + " not allowed"));
      }
      return;
    }
    case FieldKind::list:
      return bad_kind();
  }
}

}  // namespace

std::vector<Issue> validate_metadata(const MetadataInstance& instance, const Template& tpl,
                                     const TermResolver& terms, const std::string& file) {
  std::vector<Issue> issues;
  if (!instance.is_object()) {
    issues.push_back(make_error("META_BAD_KIND", {file, 0, {}}, "instance must be a JSON object"));
    return issues;
  }
  for (const auto& f : tpl.fields) {
    auto it = instance.find(f.name);
    if (it == instance.end() || empty_value(*it)) {
      if (f.required)
        issues.push_back(make_error("META_MISSING_REQUIRED", {file, 0, f.name}, "required field is missing"));
      continue;
    }
    if (f.value.kind != FieldKind::list) {
      check_value(*it, f.value, f.name, terms, file, issues);
      continue;
    }
    if (!it->is_array()) {
      issues.push_back(make_error("META_BAD_KIND", {file, 0, f.name}, "expected list"));
      continue;
    }
    for (std::size_t i = 0; i < it->size(); ++i)
      check_value((*it)[i], *f.item, f.name + "[" + std::to_string(i) + "]", terms, file, issues);
  }
  for (auto it = instance.begin(); it != instance.end(); ++it) {
    const std::string& key = it.key();
    if (key.starts_with('@') || tpl.find(key)) continue;
    if (std::find(tpl.system_fields.begin(), tpl.system_fields.end(), key) != tpl.system_fields.end()) continue;
    issues.push_back(make_warning("META_UNKNOWN_FIELD", {file, 0, key}, "field not defined by template " + tpl.name));
  }
  sort_issues(issues);
  return issues;
}

// ---------------------------------------------------------------------------
// serialization

std::string serialize_metadata(const MetadataInstance& instance) {
  Json out = instance;
  out.erase("@context");
  Json ctx = Json::object();
  for (auto it = out.begin(); it != out.end(); ++it)
    if (!it.key().starts_with('@')) ctx[it.key()] = std::string(kFieldIriPrefix) + it.key();
  out["@context"] = std::move(ctx);
  return out.dump(2) + "\n";
}

Result<MetadataInstance> parse_metadata(std::string_view raw, const std::string& file) {
  Json j = Json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    return Result<MetadataInstance>::failure(
        {make_error("META_BAD_JSON", {file, 0, {}}, "metadata is not a JSON object")});
  j.erase("@context");
  return Result<MetadataInstance>::success(std::move(j));
}

namespace {

void emit_yaml(YAML::Emitter& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::object:
      out << YAML::BeginMap;
      for (auto it = j.begin(); it != j.end(); ++it) {
        out << YAML::Key << YAML::DoubleQuoted << it.key() << YAML::Value;
        emit_yaml(out, *it);
      }
      out << YAML::EndMap;
      break;
    case Json::value_t::array:
      out << YAML::BeginSeq;
      for (const auto& v : j) emit_yaml(out, v);
      out << YAML::EndSeq;
      break;
    case Json::value_t::string: out << YAML::DoubleQuoted << j.get<std::string>(); break;
    case Json::value_t::boolean: out << j.get<bool>(); break;
    case Json::value_t::number_integer: out << j.get<long long>(); break;
    case Json::value_t::number_unsigned: out << j.get<unsigned long long>(); break;
    case Json::value_t::number_float: out << j.dump(); break;
    default: out << YAML::Null; break;
  }
}

}  // namespace

std::string metadata_to_yaml(const MetadataInstance& instance) {
  auto parsed = parse_metadata(serialize_metadata(instance));
  Json with_context = Json::parse(serialize_metadata(*parsed));
  YAML::Emitter out;
  emit_yaml(out, with_context);
  return std::string(out.c_str()) + "\n";
}

// ---------------------------------------------------------------------------
// typed views

std::string_view to_string(AccessTier t) { return t == AccessTier::public_tier ? "public" : "controlled"; }

MetadataInstance to_instance(const StudyMetadata& m) {
  Json j = {{"accession", m.accession},
            {"title", m.title},
            {"principal_investigator", m.principal_investigator},
            {"program", m.program},
            {"nih_institute", m.nih_institute},
            {"release_date", m.release_date},
            {"estimated_cohort_size", m.estimated_cohort_size},
            {"study_domains", m.study_domains},
            {"population_focus", m.population_focus},
            {"data_collection_methods", m.data_collection_methods},
            {"study_design", m.study_design},
            {"multi_center", m.multi_center},
            {"sites", m.sites},
            {"data_types", m.data_types},
            {"keywords", m.keywords},
            {"access_tier", to_string(m.access_tier)}};
  if (m.doi) j["doi"] = *m.doi;
  return j;
}

StudyMetadata study_from_instance(const MetadataInstance& j) {
  StudyMetadata m;
  auto list = [&](const char* k) { return string_list(j, k); };
  m.accession = j.value("accession", "");
  m.title = j.value("title", "");
  m.principal_investigator = j.value("principal_investigator", "");
  m.program = j.value("program", "");
  m.nih_institute = j.value("nih_institute", "");
  if (j.contains("doi") && j["doi"].is_string()) m.doi = j["doi"].get<std::string>();
  m.release_date = j.value("release_date", "");
  m.estimated_cohort_size = j.value("estimated_cohort_size", 0LL);
  m.study_domains = list("study_domains");
  m.population_focus = list("population_focus");
  m.data_collection_methods = list("data_collection_methods");
  m.study_design = j.value("study_design", "");
  m.multi_center = j.value("multi_center", false);
  m.sites = list("sites");
  m.data_types = list("data_types");
  m.keywords = list("keywords");
  m.access_tier = j.value("access_tier", "controlled") == "public" ? AccessTier::public_tier
                                                                  : AccessTier::controlled;
  return m;
}

Json summary_to_json(const SummaryStats& s) {
  Json vars = Json::array();
  for (const auto& v : s.variables) {
    Json e = {{"name", v.name}, {"missing", v.missing}};
    if (v.min) e["min"] = *v.min;
    if (v.max) e["max"] = *v.max;
    if (v.mean) e["mean"] = *v.mean;
    vars.push_back(std::move(e));
  }
  return {{"n_records", s.n_records}, {"n_variables", s.n_variables}, {"variables", std::move(vars)}};
}

SummaryStats summary_from_json(const Json& j) {
  SummaryStats s;
  if (!j.is_object()) return s;
  s.n_records = j.value("n_records", std::size_t{0});
  s.n_variables = j.value("n_variables", std::size_t{0});
  if (auto it = j.find("variables"); it != j.end() && it->is_array()) {
    for (const auto& e : *it) {
      VariableSummary v;
      v.name = e.value("name", "");
      v.missing = e.value("missing", std::size_t{0});
      if (e.contains("min")) v.min = e["min"].get<double>();
      if (e.contains("max")) v.max = e["max"].get<double>();
      if (e.contains("mean")) v.mean = e["mean"].get<double>();
      s.variables.push_back(std::move(v));
    }
  }
  return s;
}

MetadataInstance to_instance(const FileMetadata& m) {
  Json types = Json::array();
  Json names = Json::array();
  for (const auto& c : m.creators) {
    const std::string_view iri = c.type == CreatorType::person ? kPersonIri : kOrganizationIri;
    types.push_back({{"iri", iri}, {"label", c.type == CreatorType::person ? "Person" : "Organization"}});
    names.push_back(c.name);
  }
  Json subjects = Json::array();
  for (const auto& t : m.subjects) subjects.push_back({{"iri", t.iri}, {"label", t.label}, {"source", t.source}});
  return {{"study", m.study},
          {"file_name", m.file_name},
          {"version", m.version},
          {"creator_types", std::move(types)},
          {"creator_names", std::move(names)},
          {"subjects", std::move(subjects)},
          {"summary", summary_to_json(m.summary)},
          {"deid_applied", m.deid_applied},
          {"harmonized", m.harmonized}};
}

FileMetadata file_from_instance(const MetadataInstance& j) {
  FileMetadata m;
  m.study = j.value("study", "");
  m.file_name = j.value("file_name", "");
  m.version = j.value("version", 1);
  const auto names = string_list(j, "creator_names");
  if (auto it = j.find("creator_types"); it != j.end() && it->is_array()) {
    for (std::size_t i = 0; i < it->size() && i < names.size(); ++i) {
      const Json& t = (*it)[i];
      const std::string iri = t.is_object() ? t.value("iri", "") : std::string{};
      m.creators.push_back({iri == kOrganizationIri ? CreatorType::organization : CreatorType::person, names[i]});
    }
  }
  if (auto it = j.find("subjects"); it != j.end() && it->is_array())
    for (const auto& t : *it)
      if (t.is_object()) m.subjects.push_back({t.value("iri", ""), t.value("label", ""), t.value("source", "")});
  if (j.contains("summary")) m.summary = summary_from_json(j["summary"]);
  m.deid_applied = j.value("deid_applied", false);
  m.harmonized = j.value("harmonized", false);
  return m;
}

}  // namespace fairhub
