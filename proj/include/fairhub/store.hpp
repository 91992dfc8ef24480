#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairhub/catalog.hpp"
#include "fairhub/issue.hpp"
#include "fairhub/metadata.hpp"

namespace fairhub::store {

namespace fs = std::filesystem;

/// Relative path (forward slashes) -> lowercase hex SHA-256 of the bytes.
using Manifest = std::map<std::string, std::string>;
/// Relative path -> file bytes.
using FileSet = std::map<std::string, std::string>;

inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr std::string_view kCatalogName = "catalog.json";

Manifest compute_manifest(const FileSet& files);
/// {"files": {path: sha256}} with sorted keys and a trailing newline.
std::string serialize_manifest(const Manifest& m);
/// Issue code STORE_BAD_MANIFEST.
Result<Manifest> parse_manifest(std::string_view raw, const std::string& file = {});
/// "local:" + first 12 hex characters of the SHA-256 of the serialized manifest.
std::string persistent_id(const Manifest& m);

fs::path study_dir(const fs::path& root, std::string_view accession);

/// Whole-file read; nullopt when the file cannot be opened.
std::optional<std::string> read_file(const fs::path& p);
/// Writes to a sibling temporary file and renames it into place.
/// Throws std::filesystem::filesystem_error on failure.
void write_file_atomic(const fs::path& p, std::string_view bytes);

/// Exclusive advisory lock on root/studies/.<accession>.lock, held for the
/// object's lifetime.
class StudyLock {
 public:
  StudyLock(const fs::path& root, std::string_view accession);
  ~StudyLock();
  StudyLock(const StudyLock&) = delete;
  StudyLock& operator=(const StudyLock&) = delete;

 private:
  int fd_ = -1;
};

struct WriteResult {
  Manifest manifest;
  std::string persistent_id;
};

/// Replaces root/studies/<accession> with exactly `files` plus manifest.json.
/// The new tree is staged beside the old one and swapped in by rename.
/// Throws std::filesystem::filesystem_error on I/O failure.
WriteResult write_study(const fs::path& root, std::string_view accession, const FileSet& files);

/// Recomputes hashes of stored bytes. Issue codes: STORE_MISSING_STUDY,
/// STORE_BAD_MANIFEST, STORE_HASH_MISMATCH, STORE_MISSING_FILE, STORE_EXTRA_FILE.
std::vector<Issue> verify_study(const fs::path& root, std::string_view accession);

/// Accessions with a study directory, sorted.
std::vector<std::string> list_studies(const fs::path& root);

struct FileEntry {
  std::string name;  // bundle directory name
  bool harmonized = false;
  std::string file_name;
  int version = 1;
  std::size_t records = 0;
  std::size_t variables = 0;
};

struct StudyOverview {
  StudyMetadata metadata;
  MetadataInstance instance;
  std::vector<std::string> documents;
  std::vector<FileEntry> files;  // originals first, each group sorted by name
  std::vector<std::string> variables;  // sorted union over all stored dictionaries
  std::string persistent_id;
};

/// Issue codes: STORE_MISSING_STUDY, STORE_BAD_STUDY.
Result<StudyOverview> load_overview(const fs::path& root, std::string_view accession);

catalog::StudyRecord to_record(const StudyOverview& o);

/// Builds records for every stored study and writes root/catalog.json.
Result<std::vector<catalog::StudyRecord>> rebuild_catalog(const fs::path& root);
/// Reads root/catalog.json. Issue codes: CAT_MISSING, CAT_BAD_JSON.
Result<std::vector<catalog::StudyRecord>> load_catalog(const fs::path& root);

}  // namespace fairhub::store
