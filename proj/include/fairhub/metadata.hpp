#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fairhub/issue.hpp"
#include "fairhub/tabledata.hpp"
#include "json.hpp"

namespace fairhub {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Ontology terms
// ---------------------------------------------------------------------------

struct OntologyTerm {
  std::string iri;
  std::string label;
  std::string source;

  friend bool operator==(const OntologyTerm&, const OntologyTerm&) = default;
};

/// Scheme-qualified and free of whitespace: `scheme:rest`.
bool is_absolute_iri(std::string_view iri);

/// Looks terms up by IRI. Implementations must be safe for concurrent reads.
class TermResolver {
 public:
  virtual ~TermResolver() = default;
  virtual const OntologyTerm* resolve(std::string_view iri) const = 0;
};

/// Offline registry loaded from JSON lines; immutable after load.
class TermRegistry final : public TermResolver {
 public:
  const OntologyTerm* resolve(std::string_view iri) const override;
  std::size_t size() const { return terms_.size(); }

 private:
  friend Result<TermRegistry> load_term_registry(std::string_view raw, const std::string& file);
  std::unordered_map<std::string, OntologyTerm> terms_;
};

/// Client for a remote terminology service. Only the offline stub ships: it
/// resolves nothing.
class RemoteTermClient final : public TermResolver {
 public:
  explicit RemoteTermClient(std::string endpoint) : endpoint_(std::move(endpoint)) {}
  const OntologyTerm* resolve(std::string_view) const override { return nullptr; }
  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
};

/// One JSON object per line: {"iri": ..., "label": ..., "source": ...}.
/// Blank lines are skipped. Issue codes: TERM_BAD_JSON, TERM_BAD_IRI, TERM_DUP_IRI.
Result<TermRegistry> load_term_registry(std::string_view raw, const std::string& file = {});

// ---------------------------------------------------------------------------
// Templates
// ---------------------------------------------------------------------------

enum class FieldKind { text, integer, date, boolean, controlled, term, list };

std::string_view to_string(FieldKind k);
std::optional<FieldKind> parse_field_kind(std::string_view s);

struct ValueSpec {
  FieldKind kind = FieldKind::text;
  std::vector<std::string> values;   // controlled
  std::vector<std::string> sources;  // term
  std::optional<std::string> pattern;  // text, full match
  std::optional<long long> min;        // integer
};

struct FieldSpec {
  std::string name;
  bool required = false;
  ValueSpec value;                  // for lists: kind == list and `item` describes elements
  std::optional<ValueSpec> item;
};

struct Section {
  std::string name;
  std::vector<std::string> fields;
};

struct Template {
  std::string name;
  std::string version;
  std::vector<FieldSpec> fields;
  std::vector<Section> sections;
  /// Fields computed by the pipeline rather than supplied by contributors;
  /// accepted in instances without validation.
  std::vector<std::string> system_fields;

  const FieldSpec* find(std::string_view field) const;
};

/// Issue codes: TPL_BAD_JSON, TPL_DUP_FIELD, TPL_BAD_KIND, TPL_EMPTY_VALUES,
/// TPL_EMPTY_SOURCES, TPL_BAD_PATTERN, TPL_BAD_SECTION.
Result<Template> parse_template(std::string_view raw, const std::string& file = {});

/// A metadata instance is a JSON object mapping field names to values. Term
/// values are objects {"iri": ..., "label": ...}. Keys starting with '@' are
/// linked-data annotations and are not validated.
using MetadataInstance = Json;

/// Issue codes: META_MISSING_REQUIRED, META_BAD_KIND, META_BAD_VALUE,
/// META_UNRESOLVED_TERM (errors) and META_UNKNOWN_FIELD (warning). Sorted by
/// field name; list elements are reported as `field[i]`.
std::vector<Issue> validate_metadata(const MetadataInstance& instance, const Template& tpl,
                                     const TermResolver& terms, const std::string& file = {});

/// Stable-ordered JSON with an "@context" block naming each field's IRI.
std::string serialize_metadata(const MetadataInstance& instance);
/// Inverse of serialize_metadata; drops the "@context" block.
Result<MetadataInstance> parse_metadata(std::string_view raw, const std::string& file = {});
/// YAML mirror of the serialized JSON.
std::string metadata_to_yaml(const MetadataInstance& instance);

inline constexpr std::string_view kFieldIriPrefix = "urn:fairhub:field:";

// ---------------------------------------------------------------------------
// Typed study and file metadata
// ---------------------------------------------------------------------------

enum class AccessTier { public_tier, controlled };
std::string_view to_string(AccessTier t);

struct StudyMetadata {
  std::string accession;
  std::string title;
  std::string principal_investigator;
  std::string program;
  std::string nih_institute;
  std::optional<std::string> doi;
  std::string release_date;
  long long estimated_cohort_size = 0;
  std::vector<std::string> study_domains;
  std::vector<std::string> population_focus;
  std::vector<std::string> data_collection_methods;
  std::string study_design;
  bool multi_center = false;
  std::vector<std::string> sites;
  std::vector<std::string> data_types;
  std::vector<std::string> keywords;
  AccessTier access_tier = AccessTier::controlled;

  friend bool operator==(const StudyMetadata&, const StudyMetadata&) = default;
};

MetadataInstance to_instance(const StudyMetadata& m);
/// Assumes the instance already passed validation against the study template.
StudyMetadata study_from_instance(const MetadataInstance& instance);

enum class CreatorType { person, organization };

inline constexpr std::string_view kPersonIri = "http://vocab.fairdatacollective.org/gdmt/Person";
inline constexpr std::string_view kOrganizationIri =
    "http://vocab.fairdatacollective.org/gdmt/Organization";

struct Creator {
  CreatorType type = CreatorType::person;
  std::string name;

  friend bool operator==(const Creator&, const Creator&) = default;
};

struct FileMetadata {
  std::string study;  // accession
  std::string file_name;
  int version = 1;
  std::vector<Creator> creators;
  std::vector<OntologyTerm> subjects;
  SummaryStats summary;
  bool deid_applied = false;
  bool harmonized = false;

  friend bool operator==(const FileMetadata&, const FileMetadata&) = default;
};

/// Creators are carried as two parallel lists: `creator_types` (GDMT terms)
/// and `creator_names`.
MetadataInstance to_instance(const FileMetadata& m);
FileMetadata file_from_instance(const MetadataInstance& instance);

Json summary_to_json(const SummaryStats& s);
SummaryStats summary_from_json(const Json& j);

}  // namespace fairhub
