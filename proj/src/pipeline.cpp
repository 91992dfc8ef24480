#include "fairhub/pipeline.hpp"

#include <algorithm>
#include <set>

#include "fairhub/crypto.hpp"
#include "fairhub/dictionary.hpp"
#include "fairhub/tabledata.hpp"

namespace fairhub::pipeline {

namespace {

bool safe_name(std::string_view s) {
  if (s.empty() || s.front() == '.') return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
           c == '-' || c == '.';
  });
}

void relabel(std::vector<Issue>& issues, const std::string& file) {
  for (auto& i : issues) i.location.file = file;
}

void append(std::vector<Issue>& to, std::vector<Issue> from) {
  to.insert(to.end(), std::make_move_iterator(from.begin()), std::make_move_iterator(from.end()));
}

std::string data_label(const std::string& bundle) { return bundle + "/data.csv"; }
std::string dict_label(const std::string& bundle) { return bundle + "/dict.csv"; }
std::string meta_label(const std::string& bundle) { return bundle + "/meta.json"; }

}  // namespace

// ---------------------------------------------------------------------------
// ingest

Result<StagedStudy> ingest(const fs::path& dir) {
  std::vector<Issue> issues;
  StagedStudy s;
  auto missing = [&](const std::string& what) {
    issues.push_back(make_error("ING_MISSING_COMPONENT", {what, 0, {}}, what + " is missing"));
  };
  if (!fs::is_directory(dir)) {
    issues.push_back(make_error("ING_BAD_LAYOUT", {dir.filename().string(), 0, {}}, "study path is not a directory"));
    return Result<StagedStudy>::failure(std::move(issues));
  }

  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string n = e.path().filename().string();
    if (n == "study.json" || n == "docs" || n == "bundles") continue;
    issues.push_back(make_warning("ING_EXTRA_FILE", {n, 0, {}}, "unrecognized entry ignored"));
  }

  if (auto raw = store::read_file(dir / "study.json")) {
    auto inst = parse_metadata(*raw, "study.json");
    append(issues, inst.issues);
    if (inst) {
      s.study_instance = *inst;
      auto acc = s.study_instance.find("accession");
      if (acc != s.study_instance.end() && acc->is_string() && safe_name(acc->get<std::string>()))
        s.accession = acc->get<std::string>();
      else
        issues.push_back(make_error("ING_BAD_LAYOUT", {"study.json", 0, "accession"},
                                    "study.json needs an accession usable as a directory name"));
    }
  } else {
    missing("study.json");
  }

  if (fs::is_directory(dir / "docs")) {
    for (const auto& e : fs::directory_iterator(dir / "docs")) {
      const std::string n = e.path().filename().string();
      if (!e.is_regular_file() || !safe_name(n)) {
        issues.push_back(make_warning("ING_EXTRA_FILE", {"docs/" + n, 0, {}}, "only plain documents are kept"));
        continue;
      }
      if (auto bytes = store::read_file(e.path())) s.documents[n] = std::move(*bytes);
    }
  }

  std::vector<std::string> names;
  if (fs::is_directory(dir / "bundles")) {
    for (const auto& e : fs::directory_iterator(dir / "bundles")) {
      const std::string n = e.path().filename().string();
      if (!e.is_directory() || !safe_name(n)) {
        issues.push_back(make_error("ING_BAD_LAYOUT", {"bundles/" + n, 0, {}}, "bundles/ holds one directory per bundle"));
        continue;
      }
      names.push_back(n);
    }
  }
  std::sort(names.begin(), names.end());
  if (names.empty()) missing("bundles/<name>/");

  for (const auto& name : names) {
    const fs::path bdir = dir / "bundles" / name;
    for (const auto& e : fs::directory_iterator(bdir)) {
      const std::string n = e.path().filename().string();
      if (n != "data.csv" && n != "dict.csv" && n != "meta.json")
        issues.push_back(make_warning("ING_EXTRA_FILE", {name + "/" + n, 0, {}}, "unrecognized file ignored"));
    }
    auto data = store::read_file(bdir / "data.csv");
    auto dict = store::read_file(bdir / "dict.csv");
    auto meta = store::read_file(bdir / "meta.json");
    if (!data) missing(data_label(name));
    if (!dict) missing(dict_label(name));
    if (!meta) missing(meta_label(name));
    if (!data || !dict || !meta) continue;

    auto t = parse_table(*data, data_label(name));
    auto d = parse_dictionary(*dict, dict_label(name));
    auto m = parse_metadata(*meta, meta_label(name));
    append(issues, t.issues);
    append(issues, d.issues);
    append(issues, m.issues);
    if (!t || !d || !m) continue;
    StagedBundle b;
    b.name = name;
    b.bundle.table = std::move(*t);
    b.bundle.dictionary = std::move(*d);
    b.meta_instance = std::move(*m);
    b.bundle.file_metadata = file_from_instance(b.meta_instance);
    if (b.bundle.file_metadata.file_name.empty()) b.bundle.file_metadata.file_name = name + ".csv";
    s.bundles.push_back(std::move(b));
  }
  return finish(std::move(s), std::move(issues));
}

// ---------------------------------------------------------------------------
// config

Result<PipelineConfig> load_config(const fs::path& config_file) {
  std::vector<Issue> issues;
  const std::string label = config_file.filename().string();
  auto raw = store::read_file(config_file);
  Json j = raw ? Json::parse(*raw, nullptr, false) : Json();
  if (!raw || j.is_discarded() || !j.is_object()) {
    issues.push_back(make_error("CFG_BAD_JSON", {label, 0, {}}, "config is not a readable JSON object"));
    return Result<PipelineConfig>::failure(std::move(issues));
  }
  const fs::path base = config_file.parent_path();
  auto path_of = [&](const std::string& v) { return fs::path(v).is_absolute() ? fs::path(v) : base / v; };
  auto bad_value = [&](const std::string& key, const std::string& msg) {
    issues.push_back(make_error("CFG_BAD_VALUE", {label, 0, key}, msg));
  };
  // reads the file named by `key`; nullopt (with an issue) when absent
  auto load = [&](const std::string& key, bool required) -> std::optional<std::pair<std::string, std::string>> {
    if (!j.contains(key)) {
      if (required) issues.push_back(make_error("CFG_MISSING_PATH", {label, 0, key}, "required path not set"));
      return std::nullopt;
    }
    if (!j[key].is_string()) {
      bad_value(key, "expected a path string");
      return std::nullopt;
    }
    const fs::path p = path_of(j[key].get<std::string>());
    auto bytes = store::read_file(p);
    if (!bytes) {
      issues.push_back(make_error("CFG_MISSING_PATH", {label, 0, key}, "cannot read " + p.string()));
      return std::nullopt;
    }
    return std::make_pair(p.filename().string(), std::move(*bytes));
  };

  PipelineConfig cfg;
  if (auto st = j.find("stages"); st != j.end() && st->is_object()) {
    cfg.harmonize = st->value("harmonize", true);
    cfg.store = st->value("store", true);
    cfg.index = st->value("index", true);
  }
  const std::string mode = j.value("deid_mode", "transform");
  if (mode == "transform") cfg.deid_mode = DeidMode::transform;
  else if (mode == "verify-only") cfg.deid_mode = DeidMode::verify_only;
  else bad_value("deid_mode", "expected transform or verify-only");
  const std::string strict = j.value("harmonization", "strict");
  if (strict == "strict") cfg.strictness = harmonize::Strictness::strict;
  else if (strict == "lenient") cfg.strictness = harmonize::Strictness::lenient;
  else bad_value("harmonization", "expected strict or lenient");
  if (auto ms = j.find("missing_sentinels"); ms != j.end()) {
    if (!ms->is_array()) bad_value("missing_sentinels", "expected a list of strings");
    else
      for (const auto& v : *ms)
        if (v.is_string()) cfg.missing.sentinels.push_back(v.get<std::string>());
  }

  if (cfg.store || cfg.index) {
    if (j.contains("store_root") && j["store_root"].is_string())
      cfg.store_root = path_of(j["store_root"].get<std::string>());
    else
      issues.push_back(make_error("CFG_MISSING_PATH", {label, 0, "store_root"}, "required path not set"));
  }
  if (auto f = load("deid_config", cfg.deid_mode == DeidMode::transform)) {
    auto r = deid::parse_config(f->second, f->first);
    append(issues, r.issues);
    if (r) cfg.deid = std::move(*r);
  }
  if (auto f = load("codebook", cfg.harmonize)) {
    auto r = harmonize::parse_codebook(f->second, f->first);
    append(issues, r.issues);
    if (r) cfg.codebook = std::move(*r);
  }
  if (auto ms = j.find("mappings"); ms != j.end()) {
    if (!ms->is_array()) {
      bad_value("mappings", "expected a list of paths");
    } else {
      for (const auto& v : *ms) {
        if (!v.is_string()) {
          bad_value("mappings", "expected a list of paths");
          continue;
        }
        const fs::path p = path_of(v.get<std::string>());
        auto bytes = store::read_file(p);
        if (!bytes) {
          issues.push_back(make_error("CFG_MISSING_PATH", {label, 0, "mappings"}, "cannot read " + p.string()));
          continue;
        }
        auto r = harmonize::parse_mapping_set(*bytes, p.filename().string());
        append(issues, r.issues);
        if (r) cfg.mappings.push_back(std::move(*r));
      }
    }
  }
  if (auto f = load("study_template", true)) {
    auto r = parse_template(f->second, f->first);
    append(issues, r.issues);
    if (r) cfg.study_template = std::move(*r);
  }
  if (auto f = load("file_template", true)) {
    auto r = parse_template(f->second, f->first);
    append(issues, r.issues);
    if (r) cfg.file_template = std::move(*r);
  }
  if (auto f = load("term_registry", true)) {
    auto r = load_term_registry(f->second, f->first);
    append(issues, r.issues);
    if (r) cfg.terms = std::move(*r);
  }
  return finish(std::move(cfg), std::move(issues));
}

const harmonize::MappingSet* select_mapping(const std::vector<harmonize::MappingSet>& sets,
                                            const std::string& study, const std::string& file) {
  for (const std::string& st : {study, std::string("*")}) {
    for (const auto& m : sets)
      if (m.study == st && m.file == file) return &m;
    for (const auto& m : sets)
      if (m.study == st && m.file.empty()) return &m;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------
// report

std::string_view to_string(Verdict v) {
  return v == Verdict::accepted ? "accepted" : "returned-to-contributor";
}

namespace {

std::string_view to_string(StageStatus s) {
  switch (s) {
    case StageStatus::passed: return "passed";
    case StageStatus::failed: return "failed";
    case StageStatus::skipped: return "skipped";
  }
  return "skipped";
}

Json harmonization_to_json(const harmonize::HarmonizationReport& r) {
  return {{"mapped", r.mapped},
          {"passthrough", r.passthrough},
          {"dropped", r.dropped},
          {"values_remapped", r.values_remapped},
          {"unmapped_value_incidents", r.unmapped_value_incidents},
          {"output_variables", r.output_variables}};
}

}  // namespace

std::size_t FeedbackReport::error_count() const {
  std::size_t n = 0;
  for (const auto& s : stages) n += count_errors(s.issues);
  return n;
}

const StageReport* FeedbackReport::stage(std::string_view name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

Json issue_to_json(const Issue& i) {
  return {{"severity", to_string(i.severity)},
          {"code", i.code},
          {"file", i.location.file},
          {"row", i.location.row},
          {"column", i.location.column},
          {"message", i.message}};
}

std::string report_to_json(const FeedbackReport& r) {
  Json stages = Json::array();
  std::size_t warnings = 0;
  for (const auto& s : r.stages) {
    Json issues = Json::array();
    for (const auto& i : s.issues) {
      issues.push_back(issue_to_json(i));
      if (i.severity == Severity::warning) ++warnings;
    }
    stages.push_back({{"name", s.name}, {"status", to_string(s.status)}, {"issues", std::move(issues)}});
  }
  Json deid = Json::object();
  for (const auto& [name, rep] : r.deid) {
    Json d = deid::report_to_json(rep);
    d.erase("shift_offsets");
    deid[name] = std::move(d);
  }
  Json harm = Json::object();
  for (const auto& [name, rep] : r.harmonization) harm[name] = harmonization_to_json(rep);
  Json j = {{"accession", r.accession},
            {"verdict", to_string(r.verdict)},
            {"errors", r.error_count()},
            {"warnings", warnings},
            {"stages", std::move(stages)},
            {"deid", std::move(deid)},
            {"harmonization", std::move(harm)},
            {"persistent_id", r.persistent_id ? Json(*r.persistent_id) : Json()},
            {"manifest_sha256", r.manifest_sha256 ? Json(*r.manifest_sha256) : Json()}};
  return j.dump(2) + "\n";
}

std::string report_to_text(const FeedbackReport& r) {
  std::string out = (r.accession.empty() ? std::string("(unknown study)") : r.accession) + ": " +
                    std::string(to_string(r.verdict)) + ", " + std::to_string(r.error_count()) + " error(s)\n";
  for (const auto& s : r.stages) {
    out += "  " + s.name + ": " + std::string(to_string(s.status));
    if (!s.issues.empty()) out += " (" + std::to_string(s.issues.size()) + " issue(s))";
    out += "\n";
    for (const auto& i : s.issues) {
      out += "    " + std::string(to_string(i.severity)) + " " + i.code + " " + i.location.file;
      if (i.location.row) out += ":" + std::to_string(i.location.row);
      if (!i.location.column.empty()) out += " [" + i.location.column + "]";
      out += " " + i.message + "\n";
    }
  }
  if (r.persistent_id) out += "  persistent id: " + *r.persistent_id + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// run

namespace {

// Drops configured columns the bundle does not carry; the id column is kept
// so that a missing one is still reported.
deid::DeidConfig project_config(const deid::DeidConfig& cfg, const Table& t) {
  deid::DeidConfig out = cfg;
  for (auto* set : {&out.direct_identifier_columns, &out.zip_columns, &out.date_columns,
                    &out.age_columns, &out.site_columns})
    std::erase_if(*set, [&](const std::string& c) { return !t.column_index(c); });
  return out;
}

class Runner {
 public:
  Runner(const StagedStudy& s, const PipelineConfig& c, const deid::SecretKey* k)
      : staged_(s), cfg_(c), key_(k) {
    out_.report.accession = s.accession;
    for (const auto& b : s.bundles) bundles_.push_back(b.bundle);
  }

  RunOutcome run() {
    const bool transform = cfg_.deid_mode == DeidMode::transform;
    bool ok = stage("scan", [&](auto& is) { scan(is, !transform); }) &&
              stage("deid", [&](auto& is) { deidentify(is, transform); }) &&
              (transform ? stage("rescan", [&](auto& is) { rescan(is); }) : skip("rescan")) &&
              stage("validate", [&](auto& is) { validate(is); }) &&
              stage("metadata", [&](auto& is) { metadata(is); }) &&
              (cfg_.harmonize ? stage("harmonize", [&](auto& is) { harmonize_all(is); }) : skip("harmonize"));
    if (ok && cfg_.store) ok = stage("store", [&](auto& is) { store_study(is); });
    else skip("store");
    if (ok && cfg_.index && cfg_.store) ok = stage("index", [&](auto& is) { index(is); });
    else skip("index");
    for (const auto& name : stage_names())
      if (name != "ingest" && !out_.report.stage(name)) skip(name);
    std::stable_sort(out_.report.stages.begin(), out_.report.stages.end(), [](const auto& a, const auto& b) {
      auto pos = [](const std::string& n) {
        return std::find(stage_names().begin(), stage_names().end(), n) - stage_names().begin();
      };
      return pos(a.name) < pos(b.name);
    });
    out_.report.verdict = ok && !out_.io_error && out_.report.error_count() == 0
                              ? Verdict::accepted
                              : Verdict::returned_to_contributor;
    return std::move(out_);
  }

 private:
  template <typename F>
  bool stage(const std::string& name, F&& body) {
    StageReport s{name, StageStatus::passed, {}};
    if (out_.io_error) {
      s.status = StageStatus::skipped;
      out_.report.stages.push_back(std::move(s));
      return false;
    }
    body(s.issues);
    sort_issues(s.issues);
    if (has_errors(s.issues) || out_.io_error) s.status = StageStatus::failed;
    const bool passed = s.status == StageStatus::passed;
    out_.report.stages.push_back(std::move(s));
    return passed;
  }

  bool skip(const std::string& name) {
    if (!out_.report.stage(name)) out_.report.stages.push_back({name, StageStatus::skipped, {}});
    return true;
  }

  void scan(std::vector<Issue>& issues, bool gating) {
    for (std::size_t i = 0; i < bundles_.size(); ++i) {
      const std::string label = data_label(staged_.bundles[i].name);
      for (const auto& f : pii::scan_table(bundles_[i].table, detectors_)) {
        Issue is = pii::to_issue(f, label);
        if (!gating) is.severity = Severity::warning;
        issues.push_back(std::move(is));
      }
    }
  }

  void deidentify(std::vector<Issue>& issues, bool transform) {
    for (std::size_t i = 0; i < bundles_.size(); ++i) {
      const std::string& name = staged_.bundles[i].name;
      if (!transform) {
        if (!bundles_[i].file_metadata.deid_applied)
          issues.push_back(make_error("DEID_NOT_APPLIED", {meta_label(name), 0, "deid_applied"},
                                      "verify-only mode requires bundles flagged as de-identified"));
        continue;
      }
      auto r = deid::deidentify_bundle(std::move(bundles_[i]), project_config(cfg_.deid, staged_.bundles[i].bundle.table),
                                       *key_, cfg_.missing);
      relabel(r.issues, data_label(name));
      append(issues, std::move(r.issues));
      if (r) {
        out_.report.deid[name] = r->report;
        bundles_[i] = std::move(r->bundle);
      } else {
        bundles_[i] = staged_.bundles[i].bundle;
      }
    }
  }

  void rescan(std::vector<Issue>& issues) {
    for (std::size_t i = 0; i < bundles_.size(); ++i) {
      const std::string label = data_label(staged_.bundles[i].name);
      for (const auto& f : pii::scan_table(bundles_[i].table, detectors_))
        if (pii::is_blocking(f)) issues.push_back(pii::to_issue(f, label));
    }
  }

  void validate(std::vector<Issue>& issues) {
    for (std::size_t i = 0; i < bundles_.size(); ++i) {
      const std::string& name = staged_.bundles[i].name;
      auto d = validate_dictionary(bundles_[i].dictionary);
      relabel(d, dict_label(name));
      append(issues, std::move(d));
      append(issues, validate_against_dictionary(bundles_[i].table, bundles_[i].dictionary,
                                                 {data_label(name), cfg_.missing}));
    }
  }

  void metadata(std::vector<Issue>& issues) {
    append(issues, validate_metadata(staged_.study_instance, cfg_.study_template, cfg_.terms, "study.json"));
    for (const auto& b : staged_.bundles) {
      const std::string label = meta_label(b.name);
      append(issues, validate_metadata(b.meta_instance, cfg_.file_template, cfg_.terms, label));
      if (b.bundle.file_metadata.study != staged_.accession)
        issues.push_back(make_error("META_STUDY_MISMATCH", {label, 0, "study"},
                                    "file metadata names study '" + b.bundle.file_metadata.study +
                                        "' but the submission is " + staged_.accession));
    }
  }

  void harmonize_all(std::vector<Issue>& issues) {
    harmonized_.assign(bundles_.size(), std::nullopt);
    for (std::size_t i = 0; i < bundles_.size(); ++i) {
      const std::string& name = staged_.bundles[i].name;
      const auto* set = select_mapping(cfg_.mappings, staged_.accession, name);
      if (!set) {
        issues.push_back(make_warning("HARM_NO_MAPPING", {name, 0, {}}, "no mapping set applies; stored unharmonized"));
        continue;
      }
      harmonize::ApplyOptions o{cfg_.strictness, cfg_.missing, data_label(name)};
      auto r = harmonize::both_versions(bundles_[i], cfg_.codebook, *set, o);
      for (auto& is : r.issues)
        if (is.location.file.empty() || is.location.file == bundles_[i].file_metadata.file_name ||
            is.location.file == bundles_[i].dictionary.source_name)
          is.location.file = is.location.row ? data_label(name) : dict_label(name);
      append(issues, std::move(r.issues));
      if (r) {
        out_.report.harmonization[name] = r->report;
        harmonized_[i] = std::move(r->harmonized);
      }
    }
  }

  void add_bundle(store::FileSet& files, const std::string& prefix, const FileBundle& b) {
    files[prefix + "/data.csv"] = serialize_table(b.table);
    files[prefix + "/dict.csv"] = serialize_dictionary(b.dictionary);
    files[prefix + "/meta.json"] = serialize_metadata(to_instance(b.file_metadata));
  }

  void store_study(std::vector<Issue>& issues) {
    try {
      fs::create_directories(cfg_.store_root);
      store::StudyLock lock(cfg_.store_root, staged_.accession);
      const fs::path existing = store::study_dir(cfg_.store_root, staged_.accession);
      store::FileSet files;
      files["study.json"] = serialize_metadata(staged_.study_instance);
      for (const auto& [n, bytes] : staged_.documents) files["docs/" + n] = bytes;
      for (std::size_t i = 0; i < bundles_.size(); ++i) {
        const std::string& name = staged_.bundles[i].name;
        FileBundle& b = bundles_[i];
        if (auto old = store::read_file(existing / "bundles" / name / "meta.json")) {
          if (auto inst = parse_metadata(*old)) {
            const int prev = file_from_instance(*inst).version;
            if (prev > b.file_metadata.version)
              issues.push_back(make_error("STORE_VERSION_REGRESSION", {meta_label(name), 0, "version"},
                                          "stored version " + std::to_string(prev) + " is newer than " +
                                              std::to_string(b.file_metadata.version)));
          }
        }
        b.file_metadata.summary = summarize(b.table, b.dictionary, cfg_.missing);
        add_bundle(files, "bundles/" + name, b);
        if (i < harmonized_.size() && harmonized_[i]) add_bundle(files, "harmonized/" + name, *harmonized_[i]);
      }
      if (has_errors(issues)) return;
      auto w = store::write_study(cfg_.store_root, staged_.accession, files);
      out_.report.persistent_id = w.persistent_id;
      out_.report.manifest_sha256 = crypto::sha256_hex(store::serialize_manifest(w.manifest));
    } catch (const fs::filesystem_error& e) {
      out_.io_error = e.what();
    }
  }

  void index(std::vector<Issue>& issues) {
    try {
      auto r = store::rebuild_catalog(cfg_.store_root);
      for (auto& is : r.issues) {
        is.severity = Severity::warning;
        issues.push_back(std::move(is));
      }
    } catch (const fs::filesystem_error& e) {
      out_.io_error = e.what();
    }
  }

  const StagedStudy& staged_;
  const PipelineConfig& cfg_;
  const deid::SecretKey* key_;
  const std::vector<pii::Detector> detectors_ = pii::builtin_detectors();
  std::vector<FileBundle> bundles_;
  std::vector<std::optional<FileBundle>> harmonized_;
  RunOutcome out_;
};

}  // namespace

RunOutcome run_pipeline(const StagedStudy& staged, const PipelineConfig& cfg, const deid::SecretKey* key) {
  if (cfg.deid_mode == DeidMode::transform && !key)
    throw std::invalid_argument("transform mode needs a de-identification key");
  return Runner(staged, cfg, key).run();
}

RunOutcome run_study_dir(const fs::path& study_dir, const PipelineConfig& cfg, const deid::SecretKey* key) {
  auto staged = ingest(study_dir);
  if (!staged) {
    RunOutcome o;
    o.report.stages.push_back({"ingest", StageStatus::failed, staged.issues});
    for (const auto& name : stage_names())
      if (name != "ingest") o.report.stages.push_back({name, StageStatus::skipped, {}});
    o.report.verdict = Verdict::returned_to_contributor;
    return o;
  }
  RunOutcome o = run_pipeline(*staged, cfg, key);
  o.report.stages.insert(o.report.stages.begin(), {"ingest", StageStatus::passed, staged.issues});
  return o;
}

int exit_code(const RunOutcome& o) {
  if (o.io_error) return 3;
  return o.report.verdict == Verdict::accepted ? 0 : 1;
}

}  // namespace fairhub::pipeline
