#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "fairhub/deid.hpp"
#include "fairhub/store.hpp"

namespace testing {

namespace fs = std::filesystem;

inline fs::path data_dir() { return FAIRHUB_DATA_DIR; }

inline std::string slurp(const fs::path& p) {
  auto bytes = fairhub::store::read_file(p);
  if (!bytes) throw std::runtime_error("cannot read " + p.string());
  return *bytes;
}

// Key bytes 0x00..0x1f, the key the frozen digests were computed with.
inline fairhub::deid::SecretKey fixture_key() {
  std::vector<std::uint8_t> k(32);
  for (int i = 0; i < 32; ++i) k[i] = static_cast<std::uint8_t>(i);
  return fairhub::deid::SecretKey(k);
}

inline fairhub::deid::SecretKey random_key(std::mt19937_64& rng) {
  std::vector<std::uint8_t> k(32);
  for (auto& b : k) b = static_cast<std::uint8_t>(rng());
  return fairhub::deid::SecretKey(k);
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = fs::temp_directory_path() / ("fairhub-" + tag + "-" + std::to_string(rng()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

// Pipeline config with the shipped data files and the store under `root`.
inline fs::path write_config(const fs::path& dir, const fs::path& store_root,
                             const std::string& deid_mode = "transform") {
  const auto d = data_dir();
  std::string cfg = "{\n";
  cfg += "  \"store_root\": \"" + store_root.string() + "\",\n";
  cfg += "  \"deid_mode\": \"" + deid_mode + "\",\n";
  cfg += "  \"deid_config\": \"" + (d / "deid.json").string() + "\",\n";
  cfg += "  \"codebook\": \"" + (d / "codebook.json").string() + "\",\n";
  cfg += "  \"mappings\": [\"" + (d / "mappings/sample.json").string() + "\"],\n";
  cfg += "  \"study_template\": \"" + (d / "templates/study.json").string() + "\",\n";
  cfg += "  \"file_template\": \"" + (d / "templates/file.json").string() + "\",\n";
  cfg += "  \"term_registry\": \"" + (d / "terms.jsonl").string() + "\"\n}\n";
  const auto p = dir / "pipeline.json";
  fairhub::store::write_file_atomic(p, cfg);
  return p;
}

}  // namespace testing
