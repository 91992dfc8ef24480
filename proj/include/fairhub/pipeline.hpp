#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fairhub/bundle.hpp"
#include "fairhub/deid.hpp"
#include "fairhub/harmonize.hpp"
#include "fairhub/issue.hpp"
#include "fairhub/metadata.hpp"
#include "fairhub/piiscan.hpp"
#include "fairhub/store.hpp"

namespace fairhub::pipeline {

namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Ingest
//
//   <study>/study.json
//   <study>/docs/*                      optional
//   <study>/bundles/<name>/data.csv
//   <study>/bundles/<name>/dict.csv
//   <study>/bundles/<name>/meta.json

struct StagedBundle {
  std::string name;
  FileBundle bundle;
  MetadataInstance meta_instance;
};

struct StagedStudy {
  std::string accession;
  MetadataInstance study_instance;
  std::map<std::string, std::string> documents;  // file name -> bytes
  std::vector<StagedBundle> bundles;             // sorted by name
};

/// Issue codes: ING_BAD_LAYOUT, ING_MISSING_COMPONENT (errors), ING_EXTRA_FILE
/// (warning), plus parse issues from the table, dictionary and metadata readers.
Result<StagedStudy> ingest(const fs::path& study_dir);

// ---------------------------------------------------------------------------
// Configuration

enum class DeidMode { transform, verify_only };

struct PipelineConfig {
  fs::path store_root;
  DeidMode deid_mode = DeidMode::transform;
  deid::DeidConfig deid;
  harmonize::Codebook codebook;
  std::vector<harmonize::MappingSet> mappings;
  Template study_template;
  Template file_template;
  TermRegistry terms;
  harmonize::Strictness strictness = harmonize::Strictness::strict;
  MissingPolicy missing;
  bool harmonize = true;
  bool store = true;
  bool index = true;
};

/// JSON document; relative paths resolve against the config file's
/// directory. Keys: store_root, deid_mode ("transform"|"verify-only"),
/// deid_config, codebook, mappings (list), study_template, file_template,
/// term_registry, harmonization ("strict"|"lenient"), missing_sentinels,
/// stages {harmonize, store, index}. Issue codes: CFG_BAD_JSON,
/// CFG_MISSING_PATH, CFG_BAD_VALUE plus those of the referenced loaders.
Result<PipelineConfig> load_config(const fs::path& config_file);

/// File-specific set for (study, bundle name), then the study-wide set,
/// then a "*" set.
const harmonize::MappingSet* select_mapping(const std::vector<harmonize::MappingSet>& sets,
                                            const std::string& study, const std::string& file);

// ---------------------------------------------------------------------------
// Run

enum class Verdict { accepted, returned_to_contributor };
std::string_view to_string(Verdict v);

enum class StageStatus { passed, failed, skipped };

struct StageReport {
  std::string name;
  StageStatus status = StageStatus::skipped;
  std::vector<Issue> issues;
};

struct FeedbackReport {
  std::string accession;
  Verdict verdict = Verdict::returned_to_contributor;
  std::vector<StageReport> stages;
  std::map<std::string, deid::DeidReport> deid;                    // by bundle
  std::map<std::string, harmonize::HarmonizationReport> harmonization;  // by bundle
  std::optional<std::string> persistent_id;
  std::optional<std::string> manifest_sha256;

  std::size_t error_count() const;
  const StageReport* stage(std::string_view name) const;
};

inline const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = {"ingest", "scan", "deid", "rescan", "validate",
                                                 "metadata", "harmonize", "store", "index"};
  return names;
}

/// Deterministic JSON (no clock, no absolute paths). Shift offsets are
/// secret-derived and never included.
std::string report_to_json(const FeedbackReport& r);
/// Human rendering for standard error.
std::string report_to_text(const FeedbackReport& r);

Json issue_to_json(const Issue& i);

struct RunOutcome {
  FeedbackReport report;
  /// Set when the store or index could not be written.
  std::optional<std::string> io_error;
};

/// Runs scan, deid, rescan, validate, metadata, harmonize, store and index.
/// The first stage that records an error stops the run. `key` is required
/// in transform mode (precondition).
RunOutcome run_pipeline(const StagedStudy& staged, const PipelineConfig& cfg,
                        const deid::SecretKey* key);

/// ingest + run_pipeline; ingest failures come back as a returned report.
RunOutcome run_study_dir(const fs::path& study_dir, const PipelineConfig& cfg,
                         const deid::SecretKey* key);

/// Exit code for the CLI: 0 accepted, 1 returned, 3 I/O failure.
int exit_code(const RunOutcome& o);

}  // namespace fairhub::pipeline
