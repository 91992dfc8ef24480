// fairhub command-line front end.
#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

#include "fairhub/catalog.hpp"
#include "fairhub/deid.hpp"
#include "fairhub/dictionary.hpp"
#include "fairhub/harmonize.hpp"
#include "fairhub/metadata.hpp"
#include "fairhub/piiscan.hpp"
#include "fairhub/pipeline.hpp"
#include "fairhub/server.hpp"
#include "fairhub/store.hpp"
#include "fairhub/synth.hpp"
#include "fairhub/tabledata.hpp"

namespace fs = std::filesystem;
using namespace fairhub;

namespace {

constexpr int kOk = 0;
constexpr int kIssues = 1;
constexpr int kUsage = 2;
constexpr int kIo = 3;

struct Exit {
  int code;
};

std::string slurp(const std::string& path) {
  auto bytes = store::read_file(path);
  if (!bytes) {
    std::cerr << "fairhub: cannot read " << path << "\n";
    throw Exit{kIo};
  }
  return *bytes;
}

void spill(const fs::path& path, std::string_view bytes) {
  try {
    store::write_file_atomic(path, bytes);
  } catch (const fs::filesystem_error& e) {
    std::cerr << "fairhub: " << e.what() << "\n";
    throw Exit{kIo};
  }
}

void print_issues(const std::vector<Issue>& issues, bool json) {
  if (json) {
    Json arr = Json::array();
    for (const auto& i : issues) arr.push_back(pipeline::issue_to_json(i));
    std::cout << arr.dump(2) << "\n";
  }
  for (const auto& i : issues) {
    std::cerr << to_string(i.severity) << " " << i.code << " " << i.location.file;
    if (i.location.row) std::cerr << ":" << i.location.row;
    if (!i.location.column.empty()) std::cerr << " [" << i.location.column << "]";
    std::cerr << " " << i.message << "\n";
  }
}

int verdict(const std::vector<Issue>& issues) { return has_errors(issues) ? kIssues : kOk; }

// Loaders that turn parse failures into a usage exit.
template <typename T>
T must(Result<T> r) {
  if (!r) {
    print_issues(r.issues, false);
    throw Exit{kUsage};
  }
  for (const auto& i : r.issues) print_issues({i}, false);
  return std::move(*r);
}

deid::SecretKey key_from_env() {
  const char* hex = std::getenv("FAIRHUB_DEID_KEY");
  auto key = hex ? deid::SecretKey::from_hex(hex) : std::nullopt;
  if (!key) {
    std::cerr << "fairhub: FAIRHUB_DEID_KEY must hold at least " << deid::SecretKey::kMinBytes
              << " bytes of hex\n";
    throw Exit{kUsage};
  }
  return *key;
}

catalog::Index load_index(const std::string& root) {
  auto records = store::load_catalog(root);
  if (!records) {
    print_issues(records.issues, false);
    throw Exit{kIo};
  }
  return must(catalog::build_index(std::move(*records)));
}

MissingPolicy missing_policy(const std::vector<std::string>& sentinels) { return MissingPolicy{sentinels}; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fairhub: study data curation toolkit"};
  app.require_subcommand(1);
  bool json = false;
  app.add_flag("--json", json, "machine-readable output on stdout");
  int rc = kOk;

  // dict validate
  auto* dict = app.add_subcommand("dict", "data dictionary tools")->require_subcommand(1);
  auto* dict_validate = dict->add_subcommand("validate", "check a dictionary CSV");
  std::string dict_path;
  dict_validate->add_option("file", dict_path)->required();
  dict_validate->callback([&] {
    auto r = parse_dictionary(slurp(dict_path), fs::path(dict_path).filename().string());
    print_issues(r.issues, json);
    rc = verdict(r.issues);
  });

  // bundle validate
  auto* bundle = app.add_subcommand("bundle", "file bundle tools")->require_subcommand(1);
  auto* bundle_validate = bundle->add_subcommand("validate", "check a data file against its dictionary");
  std::string data_path, bdict_path;
  std::vector<std::string> sentinels;
  bundle_validate->add_option("--data", data_path)->required();
  bundle_validate->add_option("--dict", bdict_path)->required();
  bundle_validate->add_option("--missing", sentinels, "extra missing-value sentinels");
  bundle_validate->callback([&] {
    const std::string label = fs::path(data_path).filename().string();
    auto d = parse_dictionary(slurp(bdict_path), fs::path(bdict_path).filename().string());
    auto t = parse_table(slurp(data_path), label);
    std::vector<Issue> issues = d.issues;
    issues.insert(issues.end(), t.issues.begin(), t.issues.end());
    if (d && t) {
      auto v = validate_against_dictionary(*t, *d, {label, missing_policy(sentinels)});
      issues.insert(issues.end(), v.begin(), v.end());
    }
    sort_issues(issues);
    print_issues(issues, json);
    rc = verdict(issues);
  });

  // scan
  auto* scan = app.add_subcommand("scan", "look for PII in a data file");
  std::string scan_path;
  bool exhaustive = false;
  scan->add_option("file", scan_path)->required();
  scan->add_flag("--exhaustive", exhaustive, "skip prefilters");
  scan->callback([&] {
    const std::string label = fs::path(scan_path).filename().string();
    auto t = must(parse_table(slurp(scan_path), label));
    std::vector<Issue> issues;
    for (const auto& f : pii::scan_table(t, pii::builtin_detectors(), {exhaustive}))
      issues.push_back(pii::to_issue(f, label));
    print_issues(issues, json);
    rc = verdict(issues);
  });

  // deid
  auto* deid_cmd = app.add_subcommand("deid", "de-identify a bundle (key from FAIRHUB_DEID_KEY)");
  std::string deid_data, deid_dict, deid_meta, deid_cfg, deid_out;
  deid_cmd->add_option("--data", deid_data)->required();
  deid_cmd->add_option("--dict", deid_dict)->required();
  deid_cmd->add_option("--meta", deid_meta, "file metadata JSON");
  deid_cmd->add_option("--config", deid_cfg)->required();
  deid_cmd->add_option("--out", deid_out, "output directory");
  deid_cmd->add_option("--missing", sentinels, "extra missing-value sentinels");
  deid_cmd->callback([&] {
    const auto key = key_from_env();
    auto cfg = must(deid::parse_config(slurp(deid_cfg), fs::path(deid_cfg).filename().string()));
    FileBundle b;
    b.table = must(parse_table(slurp(deid_data), fs::path(deid_data).filename().string()));
    b.dictionary = must(parse_dictionary(slurp(deid_dict), fs::path(deid_dict).filename().string()));
    if (!deid_meta.empty()) b.file_metadata = file_from_instance(must(parse_metadata(slurp(deid_meta))));
    if (b.file_metadata.file_name.empty()) b.file_metadata.file_name = fs::path(deid_data).filename().string();
    auto r = deid::deidentify_bundle(std::move(b), cfg, key, missing_policy(sentinels));
    print_issues(r.issues, false);
    if (!r) {
      rc = kIssues;
      return;
    }
    Json rep = deid::report_to_json(r->report);
    rep.erase("shift_offsets");
    if (json) std::cout << rep.dump(2) << "\n";
    if (!deid_out.empty()) {
      spill(fs::path(deid_out) / "data.csv", serialize_table(r->bundle.table));
      spill(fs::path(deid_out) / "dict.csv", serialize_dictionary(r->bundle.dictionary));
      spill(fs::path(deid_out) / "meta.json", serialize_metadata(to_instance(r->bundle.file_metadata)));
    } else if (!json) {
      std::cout << serialize_table(r->bundle.table);
    }
  });

  // harmonize
  auto* harm = app.add_subcommand("harmonize", "map a bundle onto codebook CDEs");
  std::string h_data, h_dict, h_codebook, h_mapping, h_out;
  bool lenient = false;
  harm->add_option("--data", h_data)->required();
  harm->add_option("--dict", h_dict)->required();
  harm->add_option("--codebook", h_codebook)->required();
  harm->add_option("--mapping", h_mapping)->required();
  harm->add_option("--out", h_out, "output directory");
  harm->add_flag("--lenient", lenient, "blank unmapped values instead of failing");
  harm->callback([&] {
    auto cb = must(harmonize::parse_codebook(slurp(h_codebook), fs::path(h_codebook).filename().string()));
    auto set = must(harmonize::parse_mapping_set(slurp(h_mapping), fs::path(h_mapping).filename().string()));
    const std::string label = fs::path(h_data).filename().string();
    auto t = must(parse_table(slurp(h_data), label));
    auto d = must(parse_dictionary(slurp(h_dict), fs::path(h_dict).filename().string()));
    std::vector<Issue> issues = harmonize::validate_mappings(d, cb, set);
    if (!has_errors(issues)) {
      harmonize::ApplyOptions o{lenient ? harmonize::Strictness::lenient : harmonize::Strictness::strict, {}, label};
      auto r = harmonize::apply_mappings(t, d, cb, set, o);
      issues.insert(issues.end(), r.issues.begin(), r.issues.end());
      if (r) {
        if (!h_out.empty()) {
          spill(fs::path(h_out) / harmonize::harmonized_file_name(label), serialize_table(r->table));
          spill(fs::path(h_out) / "dict.csv", serialize_dictionary(r->dictionary));
        } else if (!json) {
          std::cout << serialize_table(r->table);
        }
      }
    }
    sort_issues(issues);
    print_issues(issues, json);
    rc = verdict(issues);
  });

  // metadata validate
  auto* meta = app.add_subcommand("metadata", "metadata tools")->require_subcommand(1);
  auto* meta_validate = meta->add_subcommand("validate", "check an instance against a template");
  std::string m_instance, m_template, m_terms;
  bool yaml = false;
  meta_validate->add_option("instance", m_instance)->required();
  meta_validate->add_option("--template", m_template)->required();
  meta_validate->add_option("--terms", m_terms)->required();
  meta_validate->add_flag("--yaml", yaml, "print the YAML rendering on success");
  meta_validate->callback([&] {
    auto tpl = must(parse_template(slurp(m_template), fs::path(m_template).filename().string()));
    auto terms = must(load_term_registry(slurp(m_terms), fs::path(m_terms).filename().string()));
    const std::string label = fs::path(m_instance).filename().string();
    auto inst = must(parse_metadata(slurp(m_instance), label));
    auto issues = validate_metadata(inst, tpl, terms, label);
    print_issues(issues, json);
    if (yaml && !has_errors(issues)) std::cout << metadata_to_yaml(inst);
    rc = verdict(issues);
  });

  // catalog
  auto* cat = app.add_subcommand("catalog", "study catalog")->require_subcommand(1);
  std::string store_root = "store";
  auto* cat_index = cat->add_subcommand("index", "rebuild catalog.json from a store");
  cat_index->add_option("dir", store_root, "store root")->required();
  cat_index->callback([&] {
    try {
      auto r = store::rebuild_catalog(store_root);
      print_issues(r.issues, false);
      if (!r) {
        rc = kIssues;
        return;
      }
      std::cerr << "indexed " << r->size() << " studies\n";
    } catch (const fs::filesystem_error& e) {
      std::cerr << "fairhub: " << e.what() << "\n";
      rc = kIo;
    }
  });

  auto* cat_search = cat->add_subcommand("search", "search studies");
  std::string text, sort = "title";
  std::vector<std::string> filters;
  std::size_t offset = 0, limit = 50;
  cat_search->add_option("--store", store_root, "store root");
  cat_search->add_option("--text", text);
  cat_search->add_option("--filter", filters, "field=value, repeatable");
  cat_search->add_option("--sort", sort, "field[:asc|desc]");
  cat_search->add_option("--offset", offset);
  cat_search->add_option("--limit", limit);
  cat_search->callback([&] {
    std::multimap<std::string, std::string> params = {{"text", text}, {"sort", sort},
                                                      {"offset", std::to_string(offset)},
                                                      {"limit", std::to_string(limit)}};
    for (const auto& f : filters) params.emplace("filter", f);
    auto q = server::query_from_params(params);
    if (!q) {
      print_issues(q.issues, false);
      throw Exit{kUsage};
    }
    const auto idx = load_index(store_root);
    const auto res = catalog::search(idx, *q);
    if (json) {
      Json rows = Json::array();
      for (const auto* r : res.page) rows.push_back(catalog::record_to_json(*r));
      std::cout << Json{{"total", res.total}, {"results", std::move(rows)}}.dump(2) << "\n";
    } else {
      std::cout << res.total << " studies\n";
      for (const auto* r : res.page)
        std::cout << r->metadata.accession << "\t" << r->metadata.program << "\t" << r->metadata.title << "\n";
    }
  });

  auto* cat_facets = cat->add_subcommand("facets", "facet counts and stacked histograms");
  std::string field, stack_by;
  bool as_csv = false;
  cat_facets->add_option("--store", store_root, "store root");
  cat_facets->add_option("--field", field)->required();
  cat_facets->add_option("--stack-by", stack_by);
  cat_facets->add_flag("--csv", as_csv);
  cat_facets->callback([&] {
    auto f = catalog::parse_facet_field(field);
    std::optional<catalog::FacetField> s;
    if (!stack_by.empty()) s = catalog::parse_facet_field(stack_by);
    if (!f || (!stack_by.empty() && !s)) {
      std::cerr << "fairhub: unknown facet field\n";
      throw Exit{kUsage};
    }
    const auto idx = load_index(store_root);
    auto h = catalog::facet_histogram(idx, *f, s);
    if (!h) {
      print_issues(h.issues, false);
      throw Exit{kUsage};
    }
    if (as_csv) {
      std::cout << catalog::histogram_to_csv(*h);
    } else {
      Json rows = Json::array();
      for (const auto& r : h->rows) rows.push_back({{"value", r.value}, {"total", r.total}, {"stacks", r.stacks}});
      std::cout << rows.dump(2) << "\n";
    }
  });

  auto* cat_auto = cat->add_subcommand("autocomplete", "token completions");
  std::string prefix;
  std::size_t k = 10;
  cat_auto->add_option("--store", store_root, "store root");
  cat_auto->add_option("prefix", prefix)->required();
  cat_auto->add_option("-k", k);
  cat_auto->callback([&] {
    const auto idx = load_index(store_root);
    for (const auto& t : catalog::autocomplete(idx, prefix, std::max<std::size_t>(k, 1))) std::cout << t << "\n";
  });

  // store verify
  auto* st = app.add_subcommand("store", "study store")->require_subcommand(1);
  auto* st_verify = st->add_subcommand("verify", "recheck manifest hashes");
  st_verify->add_option("dir", store_root, "store root")->required();
  st_verify->callback([&] {
    std::vector<Issue> issues;
    for (const auto& acc : store::list_studies(store_root)) {
      auto v = store::verify_study(store_root, acc);
      issues.insert(issues.end(), v.begin(), v.end());
    }
    print_issues(issues, json);
    rc = verdict(issues);
  });

  // pipeline run
  auto* pipe = app.add_subcommand("pipeline", "end-to-end curation")->require_subcommand(1);
  auto* pipe_run = pipe->add_subcommand("run", "curate one study directory");
  std::string study_path, config_path, report_path;
  pipe_run->add_option("study", study_path)->required();
  pipe_run->add_option("--config", config_path)->required();
  pipe_run->add_option("--report", report_path, "also write the JSON report here");
  pipe_run->callback([&] {
    auto cfg = pipeline::load_config(config_path);
    if (!cfg) {
      print_issues(cfg.issues, false);
      throw Exit{kUsage};
    }
    std::optional<deid::SecretKey> key;
    if (cfg->deid_mode == pipeline::DeidMode::transform) key = key_from_env();
    auto out = pipeline::run_study_dir(study_path, *cfg, key ? &*key : nullptr);
    const std::string report = pipeline::report_to_json(out.report);
    std::cout << report;
    std::cerr << pipeline::report_to_text(out.report);
    if (out.io_error) std::cerr << "fairhub: " << *out.io_error << "\n";
    if (!report_path.empty()) spill(report_path, report);
    rc = pipeline::exit_code(out);
  });

  // synth
  auto* syn = app.add_subcommand("synth", "generate a synthetic corpus");
  std::string spec_path, synth_out;
  syn->add_option("--spec", spec_path)->required();
  syn->add_option("--out", synth_out)->required();
  syn->callback([&] {
    auto spec = must(synth::parse_spec(slurp(spec_path), fs::path(spec_path).filename().string()));
    try {
      synth::write_corpus(synth::generate(spec), synth_out);
    } catch (const fs::filesystem_error& e) {
      std::cerr << "fairhub: " << e.what() << "\n";
      rc = kIo;
    }
  });

  // serve
  auto* serve = app.add_subcommand("serve", "read-only HTTP API over a store");
  std::string bind = "127.0.0.1:8080";
  serve->add_option("--store", store_root, "store root")->required();
  serve->add_option("--bind", bind, "host:port");
  serve->callback([&] {
    const auto colon = bind.rfind(':');
    int port = -1;
    if (colon != std::string::npos) {
      try {
        port = std::stoi(bind.substr(colon + 1));
      } catch (const std::exception&) {
      }
    }
    if (port < 0 || port > 65535) {
      std::cerr << "fairhub: --bind expects host:port\n";
      throw Exit{kUsage};
    }
    server::ApiHandler api(store_root);
    if (auto issues = api.reload(); has_errors(issues)) {
      print_issues(issues, false);
      throw Exit{kIo};
    }
    server::HttpServer http(api);
    const int bound = http.bind(bind.substr(0, colon), port);
    if (bound < 0) {
      std::cerr << "fairhub: cannot bind " << bind << "\n";
      throw Exit{kIo};
    }
    std::cerr << "serving " << store_root << " on " << bind.substr(0, colon) << ":" << bound << "\n";
    http.listen();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  } catch (const Exit& e) {
    return e.code;
  }
  return rc;
}
