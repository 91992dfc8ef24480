#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "fairhub/issue.hpp"
#include "fairhub/metadata.hpp"

namespace fairhub::catalog {

struct StudyRecord {
  StudyMetadata metadata;
  std::set<std::string> variables;  // union over the study's dictionaries
  bool has_data_files = false;
  std::string persistent_id;

  friend bool operator==(const StudyRecord&, const StudyRecord&) = default;
};

/// ASCII letters are folded to lower case; tokens are maximal runs of ASCII
/// alphanumerics and non-ASCII bytes.
std::vector<std::string> tokenize(std::string_view text);
/// Tokens from title, PI, keywords and study domains.
std::set<std::string> record_tokens(const StudyMetadata& m);

enum class FacetField {
  program,
  nih_institute,
  study_domains,
  population_focus,
  data_collection_methods,
  study_design,
  cohort_size,
  has_data_files,
  variables,
};

std::string_view to_string(FacetField f);
std::optional<FacetField> parse_facet_field(std::string_view s);
bool is_multi_valued(FacetField f);
const std::vector<FacetField>& all_facet_fields();

/// Cohort buckets: 0-99, 100-499, 500-999, 1000-4999, 5000-9999, 10000+.
const std::vector<std::string>& cohort_buckets();
std::string cohort_bucket(long long size);

/// Values a record contributes to a facet. Empty single values appear as
/// kNoValue; empty entries of list fields are skipped.
std::vector<std::string> facet_values(const StudyRecord& r, FacetField f);
inline constexpr std::string_view kNoValue = "(none)";

struct Filter {
  FacetField field = FacetField::program;
  std::string value;
  /// Set for cohort_size filters written as "lo..hi" (inclusive).
  std::optional<std::pair<long long, long long>> range;
};

enum class SortField { title, accession, cohort_size, program, release_date };
std::string_view to_string(SortField f);

struct Query {
  std::string text;
  std::vector<Filter> filters;
  SortField sort = SortField::title;
  bool descending = false;
  std::size_t offset = 0;
  std::size_t limit = 50;
};

inline constexpr std::size_t kMaxLimit = 500;

/// Builds a validated query. `sort` is "<field>" or "<field>:asc|desc".
/// Issue codes: QRY_BAD_FIELD, QRY_BAD_VALUE, QRY_BAD_LIMIT.
Result<Query> make_query(std::string text,
                         const std::vector<std::pair<std::string, std::string>>& filters,
                         std::string_view sort = "title", std::size_t offset = 0,
                         std::size_t limit = 50);

/// True when the record satisfies one filter.
bool matches_filter(const StudyRecord& r, const Filter& f);

class Index {
 public:
  const std::vector<StudyRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }
  const StudyRecord* find(std::string_view accession) const;
  /// Sorted distinct tokens.
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<std::uint32_t>& postings(std::string_view token) const;

 private:
  friend Result<Index> build_index(std::vector<StudyRecord> records);
  friend std::vector<std::uint32_t> match_ids(const Index& idx, const Query& q);

  std::vector<StudyRecord> records_;  // sorted by accession
  std::vector<std::string> tokens_;
  std::vector<std::vector<std::uint32_t>> postings_;  // parallel to tokens_
  std::map<FacetField, std::map<std::string, std::vector<std::uint32_t>>> facets_;
};

/// Issue code IDX_DUP_ACCESSION.
Result<Index> build_index(std::vector<StudyRecord> records);

/// Record positions matching text and filters, unsorted and unpaged.
std::vector<std::uint32_t> match_ids(const Index& idx, const Query& q);

struct SearchResult {
  std::size_t total = 0;
  std::vector<const StudyRecord*> page;
};

SearchResult search(const Index& idx, const Query& q);

/// At most k distinct tokens starting with the case-folded prefix, in
/// lexicographic order.
std::vector<std::string> autocomplete(const Index& idx, std::string_view prefix, std::size_t k);

struct HistogramRow {
  std::string value;
  std::size_t total = 0;
  std::map<std::string, std::size_t> stacks;

  friend bool operator==(const HistogramRow&, const HistogramRow&) = default;
};

struct Histogram {
  FacetField field = FacetField::program;
  std::optional<FacetField> stack_by;
  std::vector<std::string> stack_values;  // sorted
  std::vector<HistogramRow> rows;         // cohort buckets in bucket order, else lexicographic
};

/// Counts over the records matching `q` (all records when absent). A study
/// counts once per value of a list field. stack_by must be single-valued so
/// that stacks sum to row totals; otherwise QRY_BAD_FIELD.
Result<Histogram> facet_histogram(const Index& idx, FacetField field,
                                  std::optional<FacetField> stack_by = std::nullopt,
                                  const Query* q = nullptr);

/// Header `value,total[,<stack values>]`.
std::string histogram_to_csv(const Histogram& h);

Json record_to_json(const StudyRecord& r);
std::optional<StudyRecord> record_from_json(const Json& j);

/// catalog.json: a JSON array of records. Issue code CAT_BAD_JSON.
std::string serialize_records(const std::vector<StudyRecord>& records);
Result<std::vector<StudyRecord>> parse_records(std::string_view raw, const std::string& file = {});

}  // namespace fairhub::catalog
