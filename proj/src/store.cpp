#include "fairhub/store.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "fairhub/crypto.hpp"

namespace fairhub::store {

Manifest compute_manifest(const FileSet& files) {
  Manifest m;
  for (const auto& [path, bytes] : files) m[path] = crypto::sha256_hex(bytes);
  return m;
}

std::string serialize_manifest(const Manifest& m) {
  Json files = Json::object();
  for (const auto& [path, hash] : m) files[path] = hash;
  return Json{{"files", std::move(files)}}.dump(2) + "\n";
}

Result<Manifest> parse_manifest(std::string_view raw, const std::string& file) {
  Json j = Json::parse(raw, nullptr, false);
  auto bad = [&](std::string msg) {
    return Result<Manifest>::failure({make_error("STORE_BAD_MANIFEST", {file, 0, {}}, std::move(msg))});
  };
  if (j.is_discarded() || !j.is_object() || !j.contains("files") || !j["files"].is_object())
    return bad("manifest must be {\"files\": {...}}");
  Manifest m;
  for (auto it = j["files"].begin(); it != j["files"].end(); ++it) {
    if (!it->is_string()) return bad("hash for " + it.key() + " is not a string");
    const auto& h = it->get_ref<const std::string&>();
    if (h.size() != 64 || !crypto::from_hex(h)) return bad("hash for " + it.key() + " is not SHA-256 hex");
    m[it.key()] = h;
  }
  return Result<Manifest>::success(std::move(m));
}

std::string persistent_id(const Manifest& m) {
  return "local:" + crypto::sha256_hex(serialize_manifest(m)).substr(0, 12);
}

fs::path study_dir(const fs::path& root, std::string_view accession) {
  return root / "studies" / std::string(accession);
}

std::optional<std::string> read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

void write_file_atomic(const fs::path& p, std::string_view bytes) {
  fs::create_directories(p.parent_path());
  fs::path tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out)
      throw fs::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
  }
  fs::rename(tmp, p);
}

StudyLock::StudyLock(const fs::path& root, std::string_view accession) {
  const fs::path dir = root / "studies";
  fs::create_directories(dir);
  const fs::path p = dir / ("." + std::string(accession) + ".lock");
  fd_ = ::open(p.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
  if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
    if (fd_ >= 0) ::close(fd_);
    throw fs::filesystem_error("cannot lock study", p, std::error_code(errno, std::generic_category()));
  }
}

StudyLock::~StudyLock() {
  if (fd_ >= 0) {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
}

namespace {

void write_plain(const fs::path& p, std::string_view bytes) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw fs::filesystem_error("write failed", p, std::make_error_code(std::errc::io_error));
}

std::string rel_path(const fs::path& p, const fs::path& base) {
  return fs::relative(p, base).generic_string();
}

}  // namespace

WriteResult write_study(const fs::path& root, std::string_view accession, const FileSet& files) {
  const fs::path target = study_dir(root, accession);
  const fs::path staging = root / "studies" / (".staging-" + std::string(accession));
  const fs::path old = root / "studies" / (".old-" + std::string(accession));
  fs::remove_all(staging);
  fs::remove_all(old);

  WriteResult res;
  res.manifest = compute_manifest(files);
  res.persistent_id = persistent_id(res.manifest);
  for (const auto& [path, bytes] : files) write_plain(staging / path, bytes);
  write_plain(staging / kManifestName, serialize_manifest(res.manifest));

  if (fs::exists(target)) fs::rename(target, old);
  fs::rename(staging, target);
  fs::remove_all(old);
  return res;
}

std::vector<Issue> verify_study(const fs::path& root, std::string_view accession) {
  std::vector<Issue> issues;
  const fs::path dir = study_dir(root, accession);
  const std::string acc(accession);
  auto raw = read_file(dir / kManifestName);
  if (!raw) {
    issues.push_back(make_error("STORE_MISSING_STUDY", {acc, 0, {}}, "no manifest at " + dir.string()));
    return issues;
  }
  auto m = parse_manifest(*raw, acc + "/" + std::string(kManifestName));
  if (!m) return m.issues;

  std::set<std::string> seen;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = rel_path(e.path(), dir);
    if (rel == kManifestName) continue;
    seen.insert(rel);
    auto it = m->find(rel);
    if (it == m->end()) {
      issues.push_back(make_error("STORE_EXTRA_FILE", {acc, 0, rel}, "file not listed in manifest"));
      continue;
    }
    auto bytes = read_file(e.path());
    if (!bytes || crypto::sha256_hex(*bytes) != it->second)
      issues.push_back(make_error("STORE_HASH_MISMATCH", {acc, 0, rel}, "stored bytes do not match manifest"));
  }
  for (const auto& [rel, hash] : *m)
    if (!seen.contains(rel))
      issues.push_back(make_error("STORE_MISSING_FILE", {acc, 0, rel}, "manifest entry has no file"));
  sort_issues(issues);
  return issues;
}

std::vector<std::string> list_studies(const fs::path& root) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(root / "studies", ec)) {
    const std::string name = e.path().filename().string();
    if (e.is_directory() && !name.starts_with('.')) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::vector<std::string> sorted_children(const fs::path& dir, bool dirs) {
  std::vector<std::string> out;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (dirs ? e.is_directory() : e.is_regular_file()) out.push_back(e.path().filename().string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

Result<StudyOverview> load_overview(const fs::path& root, std::string_view accession) {
  const std::string acc(accession);
  const fs::path dir = study_dir(root, accession);
  auto study_raw = read_file(dir / "study.json");
  auto manifest_raw = read_file(dir / kManifestName);
  if (!study_raw || !manifest_raw)
    return Result<StudyOverview>::failure(
        {make_error("STORE_MISSING_STUDY", {acc, 0, {}}, "study is not in the store")});
  auto inst = parse_metadata(*study_raw, acc + "/study.json");
  auto manifest = parse_manifest(*manifest_raw, acc + "/" + std::string(kManifestName));
  if (!inst || !manifest)
    return Result<StudyOverview>::failure(
        {make_error("STORE_BAD_STUDY", {acc, 0, {}}, "stored study.json or manifest is unreadable")});

  StudyOverview o;
  o.instance = *inst;
  o.metadata = study_from_instance(o.instance);
  o.documents = sorted_children(dir / "docs", false);
  o.persistent_id = persistent_id(*manifest);
  std::set<std::string> vars;
  for (bool harmonized : {false, true}) {
    const fs::path group = dir / (harmonized ? "harmonized" : "bundles");
    for (const auto& name : sorted_children(group, true)) {
      auto meta_raw = read_file(group / name / "meta.json");
      auto meta = meta_raw ? parse_metadata(*meta_raw) : Result<MetadataInstance>{};
      if (!meta)
        return Result<StudyOverview>::failure(
            {make_error("STORE_BAD_STUDY", {acc, 0, name}, "bundle meta.json is unreadable")});
      const FileMetadata fm = file_from_instance(*meta);
      o.files.push_back({name, harmonized, fm.file_name, fm.version, fm.summary.n_records,
                         fm.summary.n_variables});
      for (const auto& v : fm.summary.variables) vars.insert(v.name);
    }
  }
  o.variables.assign(vars.begin(), vars.end());
  return Result<StudyOverview>::success(std::move(o));
}

catalog::StudyRecord to_record(const StudyOverview& o) {
  catalog::StudyRecord r;
  r.metadata = o.metadata;
  r.variables.insert(o.variables.begin(), o.variables.end());
  r.has_data_files = !o.files.empty();
  r.persistent_id = o.persistent_id;
  return r;
}

Result<std::vector<catalog::StudyRecord>> rebuild_catalog(const fs::path& root) {
  std::vector<catalog::StudyRecord> records;
  std::vector<Issue> issues;
  for (const auto& acc : list_studies(root)) {
    auto o = load_overview(root, acc);
    if (!o) {
      issues.insert(issues.end(), o.issues.begin(), o.issues.end());
      continue;
    }
    records.push_back(to_record(*o));
  }
  if (has_errors(issues)) return finish(std::move(records), std::move(issues));
  write_file_atomic(root / kCatalogName, catalog::serialize_records(records));
  return finish(std::move(records), std::move(issues));
}

Result<std::vector<catalog::StudyRecord>> load_catalog(const fs::path& root) {
  auto raw = read_file(root / kCatalogName);
  if (!raw)
    return Result<std::vector<catalog::StudyRecord>>::failure(
        {make_error("CAT_MISSING", {std::string(kCatalogName), 0, {}}, "no catalog at " + root.string())});
  return catalog::parse_records(*raw, std::string(kCatalogName));
}

}  // namespace fairhub::store
