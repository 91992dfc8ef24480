#include "fairhub/synth.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

#include "fairhub/csv.hpp"
#include "fairhub/dictionary.hpp"
#include "fairhub/values.hpp"

namespace fairhub::synth {

const std::vector<std::string>& programs() {
  static const std::vector<std::string> v = {"RADx-UP", "RADx-rad", "RADx-Tech", "RADx-DHT"};
  return v;
}

const std::vector<std::string>& institutes() {
  static const std::vector<std::string> v = {"NLM", "NIAID", "NIDA", "NIMHD", "NIBIB", "NICHD",
                                             "NIA", "NINR", "NHLBI", "NIEHS", "NIMH", "NCI"};
  return v;
}

const std::vector<std::string>& study_domains() {
  static const std::vector<std::string> v = {
      "Vaccination Rate/Uptake", "Pandemic Perceptions and Decision-Making", "Testing Rate/Uptake",
      "Virological Testing", "Social Determinants of Health", "Mental Health", "Health Disparities",
      "Wastewater Surveillance", "Diagnostic Technology", "Long COVID", "Digital Health",
      "Infection Prevention"};
  return v;
}

const std::vector<std::string>& population_focus() {
  static const std::vector<std::string> v = {
      "Underserved/Vulnerable Populations", "General Population", "Children", "Older Adults",
      "Racial and Ethnic Minorities", "Rural Populations", "Healthcare Workers",
      "Low Socioeconomic Status", "Pregnant People", "Tribal Communities"};
  return v;
}

const std::vector<std::string>& collection_methods() {
  static const std::vector<std::string> v = {
      "Survey", "Interview or Focus Group", "Diagnostic Testing", "Wearable Device",
      "Electronic Health Records", "Environmental Sampling", "Mobile Application",
      "Biospecimen Collection"};
  return v;
}

const std::vector<std::string>& study_designs() {
  static const std::vector<std::string> v = {
      "Longitudinal Cohort", "Cross-Sectional", "Randomized Controlled Trial", "Case-Control",
      "Pre-Post Intervention", "Observational", "Mixed Methods", "Diagnostic Accuracy"};
  return v;
}

namespace {

const std::vector<std::string> kTitleLead = {"Community", "Rapid", "Mobile", "Digital", "Household",
                                             "School-Based", "Neighborhood", "Regional"};
const std::vector<std::string> kTitleTopic = {
    "COVID-19 Testing", "Vaccine Uptake", "Symptom Monitoring", "Antigen Screening",
    "Contact Tracing", "Exposure Notification", "Serology Surveillance", "Wastewater Monitoring"};
const std::vector<std::string> kTitlePopulation = {
    "Rural Adults", "Older Adults", "Children", "Tribal Communities",
    "Essential Workers", "Pregnant People", "Veterans", "Safety-Net Patients"};
const std::vector<std::string> kLastNames = {"Ogunyemi", "Garcia", "Nguyen", "Smith", "Okafor",
                                             "Patel", "Kim", "Johnson", "Lopez", "Chen"};
const std::vector<std::string> kFirstNames = {"Omolola", "Maria", "Linh", "Robert", "Chidi",
                                              "Asha", "Min", "Denise", "Carlos", "Wei"};
const std::vector<std::string> kKeywords = {"trust", "outreach", "equity", "telehealth", "surveillance",
                                            "self-testing", "vaccination", "access", "biosensor", "wearables"};
const std::vector<std::string> kDataTypes = {"Survey", "Behavioral", "Clinical",
                                             "Electronic Medical Records", "Other", "Genomic"};
const std::vector<std::string> kVariableNames = {
    "age", "zip_code", "visit_date", "nih_education", "nih_race", "nih_sex", "covid_test_result",
    "vaccine_doses", "household_size", "insurance_status", "employment_status", "symptom_fever"};

std::string format_day(long days_from_2020) {
  using namespace std::chrono;
  const sys_days base = year{2020} / January / 1;
  return values::format_date(year_month_day{base + days{days_from_2020}});
}

std::string zero_pad(std::int64_t v, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*lld", width, static_cast<long long>(v));
  return buf;
}

std::string accession_for(std::size_t index) { return "phs9" + zero_pad(static_cast<std::int64_t>(index), 5); }

}  // namespace

StudyMetadata random_study(Rng& rng, std::size_t index) {
  StudyMetadata m;
  m.accession = accession_for(index);
  m.title = rng.pick(kTitleLead) + " " + rng.pick(kTitleTopic) + " Among " + rng.pick(kTitlePopulation);
  m.principal_investigator = rng.pick(kLastNames) + ", " + rng.pick(kFirstNames);
  m.program = rng.pick(programs());
  m.nih_institute = rng.pick(institutes());
  if (rng.chance(50)) m.doi = "10.60773/" + zero_pad(rng.between(0, 9999), 4) + "-" + zero_pad(rng.between(0, 9999), 4);
  m.release_date = format_day(365 + static_cast<long>(rng.below(1200)));
  static const std::vector<long long> scale = {1, 10, 100, 500};
  m.estimated_cohort_size = rng.between(5, 99) * rng.pick(scale);
  m.study_domains = rng.subset(study_domains(), 1, 3);
  m.population_focus = rng.subset(population_focus(), 1, 2);
  m.data_collection_methods = rng.subset(collection_methods(), 1, 2);
  m.study_design = rng.pick(study_designs());
  m.multi_center = rng.chance(40);
  m.sites = {"Site " + std::string(1, static_cast<char>('A' + rng.below(8)))};
  m.data_types = rng.subset(kDataTypes, 1, 2);
  m.keywords = rng.subset(kKeywords, 1, 2);
  m.access_tier = rng.chance(30) ? AccessTier::public_tier : AccessTier::controlled;
  return m;
}

catalog::StudyRecord random_record(Rng& rng, std::size_t index) {
  catalog::StudyRecord r;
  r.metadata = random_study(rng, index);
  for (const auto& v : rng.subset(kVariableNames, 0, 5)) r.variables.insert(v);
  r.has_data_files = rng.chance(80);
  r.persistent_id = "local:" + zero_pad(static_cast<std::int64_t>(rng.below(1000000000000ULL)), 12);
  return r;
}

// ---------------------------------------------------------------------------
// spec

Result<SynthSpec> parse_spec(std::string_view raw, const std::string& file) {
  std::vector<Issue> issues;
  auto bad = [&](const std::string& field, const std::string& msg) {
    issues.push_back(make_error("SYNTH_BAD_SPEC", {file, 0, field}, msg));
  };
  Json j = Json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    bad("", "spec must be a JSON object");
    return Result<SynthSpec>::failure(std::move(issues));
  }
  SynthSpec s;
  auto count = [&](const Json& obj, const char* key, std::size_t& dst) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_number_unsigned()) return bad(key, "expected a non-negative integer");
    dst = obj[key].get<std::size_t>();
  };
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) bad("seed", "expected a non-negative integer");
    else s.seed = j["seed"].get<std::uint64_t>();
  }
  count(j, "n_studies", s.n_studies);
  count(j, "bundles_per_study", s.bundles_per_study);
  count(j, "rows", s.rows);
  count(j, "variables", s.variables);
  if (auto it = j.find("inject"); it != j.end()) {
    if (!it->is_object()) {
      bad("inject", "expected an object");
    } else {
      count(*it, "ssn", s.inject.ssn);
      count(*it, "email", s.inject.email);
      count(*it, "phone", s.inject.phone);
      count(*it, "type", s.inject.type);
      count(*it, "enum", s.inject.enumeration);
      count(*it, "bounds", s.inject.bounds);
      count(*it, "required", s.inject.required);
      count(*it, "metadata", s.inject.metadata);
    }
  }
  if (s.n_studies < 1 || s.n_studies > 99999) bad("n_studies", "must be in 1..99999");
  if (s.bundles_per_study < 1) bad("bundles_per_study", "must be at least 1");
  if (s.rows < 1) bad("rows", "must be at least 1");
  if (s.variables < kCoreColumns) bad("variables", "must be at least " + std::to_string(kCoreColumns));
  const std::size_t extras = s.variables >= kCoreColumns ? s.variables - kCoreColumns : 0;
  const auto& in = s.inject;
  if (in.ssn + in.email + in.phone > s.rows) bad("inject", "more PII cells than rows");
  if (in.metadata > 3) bad("inject", "at most 3 metadata defects");
  if ((in.type || in.bounds || in.required) && extras < 1) bad("inject", "cell defects need extra variables");
  if (in.enumeration && extras < 3) bad("inject", "enum defects need at least 3 extra variables");
  if (in.type + in.enumeration + in.bounds + in.required > s.rows * std::max<std::size_t>(extras, 1) / 4)
    bad("inject", "too many cell defects for the table size");
  return finish(std::move(s), std::move(issues));
}

Json spec_to_json(const SynthSpec& s) {
  return {{"seed", s.seed},
          {"n_studies", s.n_studies},
          {"bundles_per_study", s.bundles_per_study},
          {"rows", s.rows},
          {"variables", s.variables},
          {"inject",
           {{"ssn", s.inject.ssn},
            {"email", s.inject.email},
            {"phone", s.inject.phone},
            {"type", s.inject.type},
            {"enum", s.inject.enumeration},
            {"bounds", s.inject.bounds},
            {"required", s.inject.required},
            {"metadata", s.inject.metadata}}}};
}

Json ledger_to_json(const std::vector<LedgerEntry>& ledger) {
  Json arr = Json::array();
  for (const auto& e : ledger)
    arr.push_back({{"study", e.study}, {"file", e.file}, {"row", e.row}, {"column", e.column}, {"code", e.code}});
  return arr;
}

// ---------------------------------------------------------------------------
// corpus

namespace {

enum class Extra { integer, decimal, enumeration, boolean, date, text };

Extra extra_kind(std::size_t j) { return static_cast<Extra>(j % 6); }
bool extra_required(std::size_t j) { return j % 2 == 0; }

std::string extra_name(std::size_t j) {
  static const char* suffix[] = {"int", "dec", "cat", "flag", "day", "txt"};
  return "v" + zero_pad(static_cast<std::int64_t>(j + 1), 2) + "_" + suffix[j % 6];
}

DataDictionary make_dictionary(std::size_t extras, const std::string& source) {
  DataDictionary d;
  d.source_name = source;
  auto var = [&](std::string id, std::string label, Datatype t, bool req) -> VariableSpec& {
    VariableSpec v;
    v.id = std::move(id);
    v.label = std::move(label);
    v.datatype = t;
    v.required = req;
    d.variables.push_back(std::move(v));
    return d.variables.back();
  };
  var("participant_id", "Participant identifier", Datatype::string, true).pattern = "P[0-9]{6}";
  var("participant_name", "Participant full name", Datatype::string, false);
  {
    auto& v = var("age", "Age at enrollment", Datatype::integer, true);
    v.units = "years";
    v.min = 0;
    v.max = 120;
  }
  var("zip_code", "Residential ZIP code", Datatype::string, false).pattern = "[0-9]{5}";
  var("visit_date", "Date of study visit", Datatype::date, true);
  var("site", "Enrollment site", Datatype::string, true);
  var("edu_years_of_school", "Highest grade or year of school completed", Datatype::enumeration, false)
      .enumeration = {{"1", "Never attended or kindergarten only"},
                      {"2", "Grades 1 through 8"},
                      {"3", "9th to 12th grade, no diploma"},
                      {"4", "High school graduate or GED completed"},
                      {"5", "Some college, no degree"},
                      {"6", "Associate degree"},
                      {"7", "Bachelor's degree"},
                      {"8", "Graduate or professional degree"}};
  var("notes", "Interviewer notes", Datatype::string, false);
  for (std::size_t j = 0; j < extras; ++j) {
    const std::string name = extra_name(j);
    switch (extra_kind(j)) {
      case Extra::integer: {
        auto& v = var(name, "Count item " + std::to_string(j + 1), Datatype::integer, extra_required(j));
        v.min = 0;
        v.max = 100;
        break;
      }
      case Extra::decimal: {
        auto& v = var(name, "Measure item " + std::to_string(j + 1), Datatype::decimal, extra_required(j));
        v.units = "mg/L";
        v.min = 0;
        v.max = 1000;
        break;
      }
      case Extra::enumeration:
        var(name, "Rating item " + std::to_string(j + 1), Datatype::enumeration, extra_required(j)).enumeration =
            {{"1", "Never"}, {"2", "Sometimes"}, {"3", "Often"}, {"4", "Always"}};
        break;
      case Extra::boolean:
        var(name, "Yes/no item " + std::to_string(j + 1), Datatype::boolean, extra_required(j));
        break;
      case Extra::date:
        var(name, "Event date " + std::to_string(j + 1), Datatype::date, extra_required(j));
        break;
      case Extra::text:
        var(name, "Free text " + std::to_string(j + 1), Datatype::string, extra_required(j));
        break;
    }
  }
  return d;
}

std::string extra_value(Rng& rng, Extra k) {
  switch (k) {
    case Extra::integer: return std::to_string(rng.between(0, 100));
    case Extra::decimal: {
      const auto cents = rng.between(0, 99999);
      return std::to_string(cents / 100) + "." + zero_pad(cents % 100, 2);
    }
    case Extra::enumeration: return std::to_string(rng.between(1, 4));
    case Extra::boolean: return rng.chance(50) ? "true" : "false";
    case Extra::date: return format_day(static_cast<long>(rng.below(1000)));
    case Extra::text: return "r" + std::to_string(rng.below(100000));
  }
  return {};
}

const std::vector<std::string> kRestrictedSamples = {"036", "059", "102", "203", "692", "821"};
const std::vector<std::string> kNotes = {"none", "follow up", "rescheduled", "declined item"};

struct Generated {
  std::string data;
  std::string dict;
  std::string meta;
};

Generated make_bundle(Rng& rng, const SynthSpec& spec, const std::string& acc, const std::string& name,
                      std::vector<LedgerEntry>& ledger) {
  const std::size_t extras = spec.variables - kCoreColumns;
  const std::string data_file = name + "/data.csv";
  const DataDictionary d = make_dictionary(extras, name + "/dict.csv");
  const std::size_t ncol = d.variables.size();
  const std::size_t notes_col = 7;

  std::vector<std::string> cells(spec.rows * ncol);
  auto at = [&](std::size_t r, std::size_t c) -> std::string& { return cells[r * ncol + c]; };
  for (std::size_t r = 0; r < spec.rows; ++r) {
    at(r, 0) = "P" + zero_pad(static_cast<std::int64_t>(r + 1), 6);
    at(r, 1) = "Person " + std::to_string(r + 1);
    at(r, 2) = std::to_string(rng.between(0, 99));
    at(r, 3) = (rng.chance(3) ? rng.pick(kRestrictedSamples) : zero_pad(rng.between(100, 999), 3)) +
               zero_pad(rng.between(0, 99), 2);
    at(r, 4) = format_day(static_cast<long>(rng.below(900)));
    at(r, 5) = std::string("Clinic ") + static_cast<char>('A' + rng.below(5));
    at(r, 6) = rng.chance(10) ? std::string() : std::to_string(rng.between(1, 8));
    at(r, 7) = rng.chance(70) ? std::string() : rng.pick(kNotes);
    for (std::size_t j = 0; j < extras; ++j)
      at(r, kCoreColumns + j) =
          !extra_required(j) && rng.chance(5) ? std::string() : extra_value(rng, extra_kind(j));
  }

  // participant_name trips the column-name detector in every bundle
  ledger.push_back({acc, data_file, 1, "participant_name", "PII_COLUMN_NAME"});

  std::set<std::size_t> pii_rows;
  auto pii = [&](std::size_t n, const char* code, auto make) {
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t r;
      do r = rng.below(spec.rows);
      while (!pii_rows.insert(r).second);
      at(r, notes_col) = make(r);
      ledger.push_back({acc, data_file, r + 2, "notes", code});
    }
  };
  pii(spec.inject.ssn, "PII_SSN", [&](std::size_t) {
    return zero_pad(rng.between(100, 899), 3) + "-" + zero_pad(rng.between(10, 99), 2) + "-" +
           zero_pad(rng.between(1000, 9999), 4);
  });
  pii(spec.inject.email, "PII_EMAIL", [&](std::size_t r) { return "contact" + std::to_string(r + 1) + "@example.org"; });
  pii(spec.inject.phone, "PII_PHONE", [&](std::size_t) {
    return "(555) " + zero_pad(rng.between(200, 999), 3) + "-" + zero_pad(rng.between(0, 9999), 4);
  });

  std::set<std::pair<std::size_t, std::size_t>> used;
  auto inject = [&](std::size_t n, const char* code, auto eligible, auto value) {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < extras; ++j)
      if (eligible(j)) cols.push_back(j);
    for (std::size_t k = 0; k < n; ++k) {
      std::size_t r, j;
      do {
        r = rng.below(spec.rows);
        j = rng.pick(cols);
      } while (!used.insert({r, j}).second);
      at(r, kCoreColumns + j) = value(extra_kind(j));
      ledger.push_back({acc, data_file, r + 2, extra_name(j), code});
    }
  };
  inject(spec.inject.type, "DATA_TYPE_MISMATCH",
         [](std::size_t j) { return extra_kind(j) != Extra::text && extra_kind(j) != Extra::enumeration; },
         [](Extra k) -> std::string {
           switch (k) {
             case Extra::integer: return "abc";
             case Extra::decimal: return "1,5";
             case Extra::boolean: return "maybe";
             default: return "2021-02-30";
           }
         });
  inject(spec.inject.enumeration, "DATA_ENUM_VIOLATION",
         [](std::size_t j) { return extra_kind(j) == Extra::enumeration; }, [](Extra) { return std::string("9"); });
  inject(spec.inject.bounds, "DATA_OUT_OF_BOUNDS",
         [](std::size_t j) { return extra_kind(j) == Extra::integer || extra_kind(j) == Extra::decimal; },
         [](Extra k) { return std::string(k == Extra::integer ? "250" : "-3.25"); });
  inject(spec.inject.required, "DATA_REQUIRED_MISSING", [](std::size_t j) { return extra_required(j); },
         [](Extra) { return std::string(); });

  Generated g;
  g.data.reserve(cells.size() * 8);
  std::vector<std::string> header;
  for (const auto& v : d.variables) header.push_back(v.id);
  csv::append_row(g.data, header);
  for (std::size_t r = 0; r < spec.rows; ++r)
    csv::append_row(g.data, std::span<const std::string>(cells.data() + r * ncol, ncol));
  g.dict = serialize_dictionary(d);

  FileMetadata fm;
  fm.study = acc;
  fm.file_name = name + ".csv";
  fm.creators = {{CreatorType::person, "Doe, Jane"}, {CreatorType::organization, "Synthetic Data Center"}};
  fm.subjects = {{"http://purl.bioontology.org/ontology/MESH/D000086382", "COVID-19", "MESH"}};
  Json meta = to_instance(fm);
  const std::string meta_file = name + "/meta.json";
  for (std::size_t k = 0; k < spec.inject.metadata; ++k) {
    if (k == 0) {
      meta["version"] = 0;
      ledger.push_back({acc, meta_file, 0, "version", "META_BAD_VALUE"});
    } else if (k == 1) {
      meta["subjects"][0]["iri"] = "http://example.org/unregistered-term";
      ledger.push_back({acc, meta_file, 0, "subjects[0]", "META_UNRESOLVED_TERM"});
    } else {
      meta.erase("file_name");
      ledger.push_back({acc, meta_file, 0, "file_name", "META_MISSING_REQUIRED"});
    }
  }
  g.meta = serialize_metadata(meta);
  return g;
}

}  // namespace

Corpus generate(const SynthSpec& spec) {
  if (spec.variables < kCoreColumns || spec.rows < 1)
    throw std::invalid_argument("synth spec below minimum shape");
  Corpus c;
  Rng rng(spec.seed);
  for (std::size_t i = 0; i < spec.n_studies; ++i) {
    StudyMetadata m = random_study(rng, i);
    const std::string& acc = m.accession;
    c.files[acc + "/study.json"] = serialize_metadata(to_instance(m));
    c.files[acc + "/docs/protocol.txt"] = "Synthetic protocol for " + acc + ".\n";
    for (std::size_t b = 0; b < spec.bundles_per_study; ++b) {
      const std::string name = b == 0 ? "survey" : "survey_" + std::to_string(b + 1);
      Generated g = make_bundle(rng, spec, acc, name, c.ledger);
      const std::string dir = acc + "/bundles/" + name + "/";
      c.files[dir + "data.csv"] = std::move(g.data);
      c.files[dir + "dict.csv"] = std::move(g.dict);
      c.files[dir + "meta.json"] = std::move(g.meta);
    }
  }
  std::sort(c.ledger.begin(), c.ledger.end());
  c.files["ledger.json"] = Json{{"spec", spec_to_json(spec)}, {"entries", ledger_to_json(c.ledger)}}.dump(2) + "\n";
  return c;
}

void write_corpus(const Corpus& c, const std::filesystem::path& out) {
  for (const auto& [rel, bytes] : c.files) {
    const auto p = out / rel;
    std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary | std::ios::trunc);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f)
      throw std::filesystem::filesystem_error("write failed", p, std::make_error_code(std::errc::io_error));
  }
}

}  // namespace fairhub::synth
