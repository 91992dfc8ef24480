#include "fairhub/server.hpp"

#include <httplib.h>

#include <charconv>

#include "fairhub/metadata.hpp"
#include "fairhub/pipeline.hpp"
#include "fairhub/store.hpp"

namespace fairhub::server {

namespace {

Response json_response(int status, const Json& j) {
  return {status, "application/json; charset=utf-8", j.dump(2) + "\n"};
}

Response error_response(int status, const std::string& error, const std::string& message,
                        const std::vector<Issue>& issues = {}) {
  Json j = {{"error", error}, {"message", message}};
  if (!issues.empty()) {
    Json arr = Json::array();
    for (const auto& i : issues) arr.push_back(pipeline::issue_to_json(i));
    j["issues"] = std::move(arr);
  }
  return json_response(status, j);
}

Response not_found(const std::string& what) { return error_response(404, "not_found", what + " not found"); }

std::optional<std::string> param(const Request& req, const std::string& key) {
  auto it = req.params.find(key);
  if (it == req.params.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> parse_size(const std::string& s) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

bool safe_segment(const std::string& s) {
  if (s.empty() || s.front() == '.') return false;
  for (char c : s)
    if (!((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
          c == '-' || c == '.'))
      return false;
  return true;
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < path.size()) {
    while (i < path.size() && path[i] == '/') ++i;
    std::size_t j = path.find('/', i);
    if (j == std::string::npos) j = path.size();
    if (j > i) out.push_back(path.substr(i, j - i));
    i = j;
  }
  return out;
}

Json summary_row(const catalog::StudyRecord& r) {
  const auto& m = r.metadata;
  return {{"accession", m.accession},
          {"title", m.title},
          {"principal_investigator", m.principal_investigator},
          {"program", m.program},
          {"nih_institute", m.nih_institute},
          {"estimated_cohort_size", m.estimated_cohort_size},
          {"access_tier", to_string(m.access_tier)},
          {"has_data_files", r.has_data_files},
          {"persistent_id", r.persistent_id}};
}

}  // namespace

Result<catalog::Query> query_from_params(const std::multimap<std::string, std::string>& params) {
  std::vector<Issue> issues;
  std::string text;
  std::string sort = "title";
  std::size_t offset = 0, limit = 50;
  std::vector<std::pair<std::string, std::string>> filters;
  for (const auto& [k, v] : params) {
    if (k == "text") {
      text = v;
    } else if (k == "sort") {
      sort = v;
    } else if (k == "filter") {
      auto eq = v.find('=');
      if (eq == std::string::npos)
        issues.push_back(make_error("QRY_BAD_VALUE", {{}, 0, "filter"}, "expected field=value"));
      else
        filters.emplace_back(v.substr(0, eq), v.substr(eq + 1));
    } else if (k == "offset" || k == "limit") {
      auto n = parse_size(v);
      if (!n) issues.push_back(make_error("QRY_BAD_VALUE", {{}, 0, k}, "expected a non-negative integer"));
      else (k == "offset" ? offset : limit) = *n;
    } else {
      issues.push_back(make_error("QRY_BAD_FIELD", {{}, 0, k}, "unknown query parameter"));
    }
  }
  auto q = catalog::make_query(text, filters, sort, offset, limit);
  issues.insert(issues.end(), q.issues.begin(), q.issues.end());
  return finish(q ? std::move(*q) : catalog::Query{}, std::move(issues));
}

ApiHandler::ApiHandler(std::filesystem::path store_root) : root_(std::move(store_root)) {
  index_ = std::make_shared<const catalog::Index>();
}

std::vector<Issue> ApiHandler::reload() {
  auto records = store::load_catalog(root_);
  if (!records) records = store::rebuild_catalog(root_);
  if (!records) return records.issues;
  auto idx = catalog::build_index(std::move(*records));
  if (!idx) return idx.issues;
  auto snap = std::make_shared<const catalog::Index>(std::move(*idx));
  std::lock_guard lock(mu_);
  index_ = std::move(snap);
  return {};
}

std::shared_ptr<const catalog::Index> ApiHandler::snapshot() const {
  std::lock_guard lock(mu_);
  return index_;
}

Response ApiHandler::handle(const Request& req) const {
  if (req.method != "GET") return error_response(405, "method_not_allowed", "the API is read-only");
  const auto snap = snapshot();
  const auto& idx = *snap;
  const auto seg = split_path(req.path);
  if (seg.size() == 1 && seg[0] == "health")
    return json_response(200, {{"status", "ok"}, {"studies", idx.size()}});
  if (seg.size() == 1 && seg[0] == "studies") return studies(req, idx);
  if (seg.size() == 1 && seg[0] == "facets") return facets(req, idx);
  if (seg.size() == 1 && seg[0] == "autocomplete") return autocomplete(req, idx);
  if (seg.size() >= 2 && seg[0] == "studies") {
    if (!safe_segment(seg[1]) || !idx.find(seg[1])) return not_found("study " + seg[1]);
    if (seg.size() == 2) return study(seg[1], idx);
    if (seg.size() == 3 && seg[2] == "metadata") return study_metadata(seg[1], req, idx);
    if (seg.size() == 4 && seg[2] == "files") return study_file(seg[1], seg[3], req, idx);
  }
  return not_found("resource " + req.path);
}

Response ApiHandler::studies(const Request& req, const catalog::Index& idx) const {
  auto q = query_from_params(req.params);
  if (!q) return error_response(400, "bad_request", "invalid query", q.issues);
  const auto res = catalog::search(idx, *q);
  Json rows = Json::array();
  for (const auto* r : res.page) rows.push_back(summary_row(*r));
  return json_response(200, {{"total", res.total},
                             {"offset", q->offset},
                             {"limit", q->limit},
                             {"sort", std::string(catalog::to_string(q->sort)) + (q->descending ? ":desc" : ":asc")},
                             {"results", std::move(rows)}});
}

Response ApiHandler::study(const std::string& acc, const catalog::Index& idx) const {
  auto o = store::load_overview(root_, acc);
  if (!o) return not_found("study " + acc);
  const bool downloadable = idx.find(acc)->metadata.access_tier == AccessTier::public_tier;
  Json files = Json::array();
  for (const auto& f : o->files)
    files.push_back({{"name", f.name},
                     {"kind", f.harmonized ? "harmonized" : "original"},
                     {"file_name", f.file_name},
                     {"version", f.version},
                     {"records", f.records},
                     {"variables", f.variables},
                     {"downloadable", downloadable}});
  return json_response(200, {{"accession", acc},
                             {"persistent_id", o->persistent_id},
                             {"access_tier", to_string(o->metadata.access_tier)},
                             {"metadata", o->instance},
                             {"documents", o->documents},
                             {"files", std::move(files)},
                             {"variables", o->variables}});
}

Response ApiHandler::study_metadata(const std::string& acc, const Request& req, const catalog::Index&) const {
  auto o = store::load_overview(root_, acc);
  if (!o) return not_found("study " + acc);
  const auto format = param(req, "format").value_or("json");
  if (format == "yaml") return {200, "application/yaml; charset=utf-8", metadata_to_yaml(o->instance)};
  if (format != "json") return error_response(400, "bad_request", "format must be json or yaml");
  return {200, "application/json; charset=utf-8", serialize_metadata(o->instance)};
}

Response ApiHandler::study_file(const std::string& acc, const std::string& name, const Request& req,
                                const catalog::Index& idx) const {
  const auto kind = param(req, "kind").value_or("original");
  if (kind != "original" && kind != "harmonized")
    return error_response(400, "bad_request", "kind must be original or harmonized");
  const auto path = store::study_dir(root_, acc) / (kind == "original" ? "bundles" : "harmonized") / name / "data.csv";
  if (!safe_segment(name) || !std::filesystem::exists(path)) return not_found("file " + name);
  if (idx.find(acc)->metadata.access_tier != AccessTier::public_tier)
    return json_response(403, {{"error", "controlled_access"},
                               {"message", "request via access process"},
                               {"accession", acc},
                               {"file", name}});
  auto bytes = store::read_file(path);
  if (!bytes) return not_found("file " + name);
  return {200, "text/csv; charset=utf-8", std::move(*bytes)};
}

Response ApiHandler::facets(const Request& req, const catalog::Index& idx) const {
  const auto field_name = param(req, "field");
  auto field = field_name ? catalog::parse_facet_field(*field_name) : std::nullopt;
  if (!field) return error_response(400, "bad_request", "field must name a facet field");
  std::optional<catalog::FacetField> stack;
  if (auto s = param(req, "stack_by")) {
    stack = catalog::parse_facet_field(*s);
    if (!stack) return error_response(400, "bad_request", "stack_by must name a facet field");
  }
  const auto format = param(req, "format").value_or("json");
  std::multimap<std::string, std::string> qp;
  for (const auto& [k, v] : req.params)
    if (k == "text" || k == "filter") qp.emplace(k, v);
  auto q = query_from_params(qp);
  if (!q) return error_response(400, "bad_request", "invalid query", q.issues);
  auto h = catalog::facet_histogram(idx, *field, stack, &*q);
  if (!h) return error_response(400, "bad_request", "invalid facet request", h.issues);
  if (format == "csv") return {200, "text/csv; charset=utf-8", catalog::histogram_to_csv(*h)};
  if (format != "json") return error_response(400, "bad_request", "format must be json or csv");
  Json rows = Json::array();
  for (const auto& r : h->rows) rows.push_back({{"value", r.value}, {"total", r.total}, {"stacks", r.stacks}});
  return json_response(200, {{"field", *field_name},
                             {"stack_by", stack ? Json(std::string(catalog::to_string(*stack))) : Json()},
                             {"stack_values", h->stack_values},
                             {"rows", std::move(rows)}});
}

Response ApiHandler::autocomplete(const Request& req, const catalog::Index& idx) const {
  const auto prefix = param(req, "prefix").value_or("");
  std::size_t k = 10;
  if (auto ks = param(req, "k")) {
    auto n = parse_size(*ks);
    if (!n || *n < 1 || *n > 100) return error_response(400, "bad_request", "k must be between 1 and 100");
    k = *n;
  }
  return json_response(200, {{"prefix", prefix}, {"tokens", catalog::autocomplete(idx, prefix, k)}});
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(const ApiHandler& api) : api_(api), svr_(std::make_unique<httplib::Server>()) {
  svr_->Get(R"(/.*)", [this](const httplib::Request& hreq, httplib::Response& hres) {
    Request req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.params.emplace(k, v);
    Response r = api_.handle(req);
    hres.status = r.status;
    hres.set_content(r.body, r.content_type.c_str());
  });
  auto read_only = [](const httplib::Request&, httplib::Response& hres) {
    hres.status = 405;
    hres.set_content(R"({"error": "method_not_allowed", "message": "the API is read-only"})",
                     "application/json; charset=utf-8");
  };
  svr_->Post(R"(/.*)", read_only);
  svr_->Put(R"(/.*)", read_only);
  svr_->Delete(R"(/.*)", read_only);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return svr_->bind_to_any_port(host);
  return svr_->bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return svr_->listen_after_bind(); }

void HttpServer::start() {
  thread_ = std::thread([this] { svr_->listen_after_bind(); });
  svr_->wait_until_ready();
}

void HttpServer::stop() {
  if (svr_) svr_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace fairhub::server
