#include "fairhub/catalog.hpp"

#include <algorithm>
#include <charconv>

#include "fairhub/csv.hpp"
#include "fairhub/values.hpp"

namespace fairhub::catalog {

namespace {

bool token_byte(unsigned char c) {
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

void add_tokens(std::set<std::string>& out, std::string_view text) {
  for (auto& t : tokenize(text)) out.insert(std::move(t));
}

std::vector<std::uint32_t> intersect(const std::vector<std::uint32_t>& a,
                                     const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<std::uint32_t> unite(const std::vector<std::uint32_t>& a,
                                 const std::vector<std::uint32_t>& b) {
  std::vector<std::uint32_t> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::optional<long long> parse_ll(std::string_view s) {
  auto v = values::parse_integer(s);
  if (!v) return std::nullopt;
  return static_cast<long long>(*v);
}

const std::vector<std::uint32_t> kEmpty;

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (token_byte(c)) {
      cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::set<std::string> record_tokens(const StudyMetadata& m) {
  std::set<std::string> out;
  add_tokens(out, m.title);
  add_tokens(out, m.principal_investigator);
  for (const auto& k : m.keywords) add_tokens(out, k);
  for (const auto& d : m.study_domains) add_tokens(out, d);
  return out;
}

// ---------------------------------------------------------------------------
// facets

std::string_view to_string(FacetField f) {
  switch (f) {
    case FacetField::program: return "program";
    case FacetField::nih_institute: return "nih_institute";
    case FacetField::study_domains: return "study_domains";
    case FacetField::population_focus: return "population_focus";
    case FacetField::data_collection_methods: return "data_collection_methods";
    case FacetField::study_design: return "study_design";
    case FacetField::cohort_size: return "cohort_size";
    case FacetField::has_data_files: return "has_data_files";
    case FacetField::variables: return "variables";
  }
  return "program";
}

const std::vector<FacetField>& all_facet_fields() {
  static const std::vector<FacetField> all = {
      FacetField::program,          FacetField::nih_institute,
      FacetField::study_domains,    FacetField::population_focus,
      FacetField::data_collection_methods, FacetField::study_design,
      FacetField::cohort_size,      FacetField::has_data_files,
      FacetField::variables};
  return all;
}

std::optional<FacetField> parse_facet_field(std::string_view s) {
  for (auto f : all_facet_fields())
    if (to_string(f) == s) return f;
  return std::nullopt;
}

bool is_multi_valued(FacetField f) {
  return f == FacetField::study_domains || f == FacetField::population_focus ||
         f == FacetField::data_collection_methods || f == FacetField::variables;
}

const std::vector<std::string>& cohort_buckets() {
  static const std::vector<std::string> b = {"0-99", "100-499", "500-999",
                                             "1000-4999", "5000-9999", "10000+"};
  return b;
}

std::string cohort_bucket(long long n) {
  const auto& b = cohort_buckets();
  if (n < 100) return b[0];
  if (n < 500) return b[1];
  if (n < 1000) return b[2];
  if (n < 5000) return b[3];
  if (n < 10000) return b[4];
  return b[5];
}

std::vector<std::string> facet_values(const StudyRecord& r, FacetField f) {
  const auto& m = r.metadata;
  auto single = [](const std::string& v) {
    return std::vector<std::string>{v.empty() ? std::string(kNoValue) : v};
  };
  auto list = [](const auto& src) {
    std::set<std::string> s;
    for (const auto& v : src)
      if (!v.empty()) s.insert(v);
    return std::vector<std::string>(s.begin(), s.end());
  };
  switch (f) {
    case FacetField::program: return single(m.program);
    case FacetField::nih_institute: return single(m.nih_institute);
    case FacetField::study_design: return single(m.study_design);
    case FacetField::study_domains: return list(m.study_domains);
    case FacetField::population_focus: return list(m.population_focus);
    case FacetField::data_collection_methods: return list(m.data_collection_methods);
    case FacetField::variables: return list(r.variables);
    case FacetField::cohort_size: return {cohort_bucket(m.estimated_cohort_size)};
    case FacetField::has_data_files: return {r.has_data_files ? "true" : "false"};
  }
  return {};
}

// ---------------------------------------------------------------------------
// queries

std::string_view to_string(SortField f) {
  switch (f) {
    case SortField::title: return "title";
    case SortField::accession: return "accession";
    case SortField::cohort_size: return "cohort_size";
    case SortField::program: return "program";
    case SortField::release_date: return "release_date";
  }
  return "title";
}

Result<Query> make_query(std::string text,
                         const std::vector<std::pair<std::string, std::string>>& filters,
                         std::string_view sort, std::size_t offset, std::size_t limit) {
  std::vector<Issue> issues;
  Query q;
  q.text = std::move(text);
  q.offset = offset;
  q.limit = limit;
  if (limit < 1 || limit > kMaxLimit)
    issues.push_back(make_error("QRY_BAD_LIMIT", {{}, 0, "limit"},
                                "limit must be between 1 and " + std::to_string(kMaxLimit)));

  for (const auto& [name, value] : filters) {
    auto field = parse_facet_field(name);
    if (!field) {
      issues.push_back(make_error("QRY_BAD_FIELD", {{}, 0, name}, "not a filterable field"));
      continue;
    }
    Filter f{*field, value, std::nullopt};
    if (*field == FacetField::cohort_size) {
      const auto& b = cohort_buckets();
      if (std::find(b.begin(), b.end(), value) == b.end()) {
        const auto dots = value.find("..");
        std::optional<long long> lo, hi;
        if (dots != std::string::npos) {
          lo = parse_ll(std::string_view(value).substr(0, dots));
          hi = parse_ll(std::string_view(value).substr(dots + 2));
        }
        if (!lo || !hi || *lo > *hi) {
          issues.push_back(make_error("QRY_BAD_VALUE", {{}, 0, name},
                                      "expected a cohort bucket or lo..hi range"));
          continue;
        }
        f.range = std::make_pair(*lo, *hi);
      }
    } else if (*field == FacetField::has_data_files && value != "true" && value != "false") {
      issues.push_back(make_error("QRY_BAD_VALUE", {{}, 0, name}, "expected true or false"));
      continue;
    }
    q.filters.push_back(std::move(f));
  }

  std::string_view field = sort, dir = "asc";
  if (auto colon = sort.find(':'); colon != std::string_view::npos) {
    field = sort.substr(0, colon);
    dir = sort.substr(colon + 1);
  }
  bool known = false;
  for (auto s : {SortField::title, SortField::accession, SortField::cohort_size, SortField::program,
                 SortField::release_date})
    if (to_string(s) == field) {
      q.sort = s;
      known = true;
    }
  if (!known || (dir != "asc" && dir != "desc"))
    issues.push_back(make_error("QRY_BAD_FIELD", {{}, 0, "sort"}, "unsupported sort '" + std::string(sort) + "'"));
  q.descending = dir == "desc";
  return finish(std::move(q), std::move(issues));
}

bool matches_filter(const StudyRecord& r, const Filter& f) {
  if (f.range) {
    const auto n = r.metadata.estimated_cohort_size;
    return n >= f.range->first && n <= f.range->second;
  }
  const auto vals = facet_values(r, f.field);
  return std::find(vals.begin(), vals.end(), f.value) != vals.end();
}

// ---------------------------------------------------------------------------
// index

const StudyRecord* Index::find(std::string_view accession) const {
  auto it = std::lower_bound(records_.begin(), records_.end(), accession,
                             [](const StudyRecord& r, std::string_view a) { return r.metadata.accession < a; });
  if (it == records_.end() || it->metadata.accession != accession) return nullptr;
  return &*it;
}

const std::vector<std::uint32_t>& Index::postings(std::string_view token) const {
  auto it = std::lower_bound(tokens_.begin(), tokens_.end(), token);
  if (it == tokens_.end() || *it != token) return kEmpty;
  return postings_[static_cast<std::size_t>(it - tokens_.begin())];
}

Result<Index> build_index(std::vector<StudyRecord> records) {
  std::vector<Issue> issues;
  std::sort(records.begin(), records.end(), [](const StudyRecord& a, const StudyRecord& b) {
    return a.metadata.accession < b.metadata.accession;
  });
  for (std::size_t i = 1; i < records.size(); ++i)
    if (records[i].metadata.accession == records[i - 1].metadata.accession)
      issues.push_back(make_error("IDX_DUP_ACCESSION", {{}, 0, records[i].metadata.accession},
                                  "accession appears more than once"));
  if (has_errors(issues)) return finish(Index{}, std::move(issues));

  Index idx;
  std::map<std::string, std::vector<std::uint32_t>> inverted;
  for (std::uint32_t i = 0; i < records.size(); ++i) {
    for (const auto& t : record_tokens(records[i].metadata)) inverted[t].push_back(i);
    for (auto f : all_facet_fields())
      for (const auto& v : facet_values(records[i], f)) idx.facets_[f][v].push_back(i);
  }
  idx.tokens_.reserve(inverted.size());
  idx.postings_.reserve(inverted.size());
  for (auto& [t, p] : inverted) {
    idx.tokens_.push_back(t);
    idx.postings_.push_back(std::move(p));
  }
  idx.records_ = std::move(records);
  return finish(std::move(idx), std::move(issues));
}

std::vector<std::uint32_t> match_ids(const Index& idx, const Query& q) {
  std::vector<std::uint32_t> ids(idx.records_.size());
  for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = i;

  for (const auto& term : tokenize(q.text)) {
    std::vector<std::uint32_t> hits;
    for (auto it = std::lower_bound(idx.tokens_.begin(), idx.tokens_.end(), term);
         it != idx.tokens_.end() && it->starts_with(term); ++it)
    {
      const auto& p = idx.postings_[static_cast<std::size_t>(it - idx.tokens_.begin())];
      hits.insert(hits.end(), p.begin(), p.end());
    }
    std::sort(hits.begin(), hits.end());
    hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
    ids = intersect(ids, hits);
  }

  std::map<FacetField, std::vector<std::uint32_t>> per_field;
  for (const auto& f : q.filters) {
    std::vector<std::uint32_t> hits;
    if (f.range) {
      for (std::uint32_t i = 0; i < idx.records_.size(); ++i)
        if (matches_filter(idx.records_[i], f)) hits.push_back(i);
    } else if (auto ft = idx.facets_.find(f.field); ft != idx.facets_.end()) {
      if (auto vt = ft->second.find(f.value); vt != ft->second.end()) hits = vt->second;
    }
    auto& acc = per_field[f.field];
    acc = unite(acc, hits);
  }
  for (const auto& [field, hits] : per_field) ids = intersect(ids, hits);
  return ids;
}

namespace {

int compare_key(const StudyMetadata& a, const StudyMetadata& b, SortField f) {
  auto cmp = [](const auto& x, const auto& y) { return x < y ? -1 : (y < x ? 1 : 0); };
  switch (f) {
    case SortField::title: return cmp(a.title, b.title);
    case SortField::accession: return 0;
    case SortField::cohort_size: return cmp(a.estimated_cohort_size, b.estimated_cohort_size);
    case SortField::program: return cmp(a.program, b.program);
    case SortField::release_date: return cmp(a.release_date, b.release_date);
  }
  return 0;
}

}  // namespace

SearchResult search(const Index& idx, const Query& q) {
  auto ids = match_ids(idx, q);
  const auto& recs = idx.records();
  // ids are in accession order, so a stable sort leaves ties by accession
  std::stable_sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
    const int c = compare_key(recs[a].metadata, recs[b].metadata, q.sort);
    if (q.sort == SortField::accession) return q.descending ? a > b : a < b;
    return q.descending ? c > 0 : c < 0;
  });
  SearchResult out;
  out.total = ids.size();
  for (std::size_t i = q.offset; i < ids.size() && out.page.size() < q.limit; ++i)
    out.page.push_back(&recs[ids[i]]);
  return out;
}

std::vector<std::string> autocomplete(const Index& idx, std::string_view prefix, std::size_t k) {
  std::string p = values::to_lower(prefix);
  std::vector<std::string> out;
  const auto& tokens = idx.tokens();
  for (auto it = std::lower_bound(tokens.begin(), tokens.end(), p);
       it != tokens.end() && it->starts_with(p) && out.size() < k; ++it)
    out.push_back(*it);
  return out;
}

Result<Histogram> facet_histogram(const Index& idx, FacetField field,
                                  std::optional<FacetField> stack_by, const Query* q) {
  if (stack_by && is_multi_valued(*stack_by))
    return Result<Histogram>::failure({make_error("QRY_BAD_FIELD", {{}, 0, std::string(to_string(*stack_by))},
                                                  "stack_by must be a single-valued field")});
  Histogram h;
  h.field = field;
  h.stack_by = stack_by;
  std::vector<std::uint32_t> ids;
  if (q) {
    ids = match_ids(idx, *q);
  } else {
    ids.resize(idx.size());
    for (std::uint32_t i = 0; i < ids.size(); ++i) ids[i] = i;
  }
  std::map<std::string, HistogramRow> rows;
  std::set<std::string> stacks;
  for (auto i : ids) {
    const auto& r = idx.records()[i];
    std::string s = stack_by ? facet_values(r, *stack_by).front() : std::string{};
    if (stack_by) stacks.insert(s);
    for (const auto& v : facet_values(r, field)) {
      auto& row = rows[v];
      row.value = v;
      ++row.total;
      if (stack_by) ++row.stacks[s];
    }
  }
  h.stack_values.assign(stacks.begin(), stacks.end());
  if (field == FacetField::cohort_size) {
    for (const auto& b : cohort_buckets())
      if (auto it = rows.find(b); it != rows.end()) h.rows.push_back(std::move(it->second));
  } else {
    for (auto& [v, row] : rows) h.rows.push_back(std::move(row));
  }
  return Result<Histogram>::success(std::move(h));
}

std::string histogram_to_csv(const Histogram& h) {
  std::string out;
  std::vector<std::string> header = {"value", "total"};
  header.insert(header.end(), h.stack_values.begin(), h.stack_values.end());
  csv::append_row(out, header);
  for (const auto& row : h.rows) {
    std::vector<std::string> cells = {row.value, std::to_string(row.total)};
    for (const auto& s : h.stack_values) {
      auto it = row.stacks.find(s);
      cells.push_back(std::to_string(it == row.stacks.end() ? 0 : it->second));
    }
    csv::append_row(out, cells);
  }
  return out;
}

// ---------------------------------------------------------------------------
// persistence

Json record_to_json(const StudyRecord& r) {
  return {{"metadata", to_instance(r.metadata)},
          {"variables", r.variables},
          {"has_data_files", r.has_data_files},
          {"persistent_id", r.persistent_id}};
}

std::optional<StudyRecord> record_from_json(const Json& j) {
  if (!j.is_object() || !j.contains("metadata") || !j["metadata"].is_object()) return std::nullopt;
  StudyRecord r;
  r.metadata = study_from_instance(j["metadata"]);
  if (auto it = j.find("variables"); it != j.end() && it->is_array())
    for (const auto& v : *it)
      if (v.is_string()) r.variables.insert(v.get<std::string>());
  r.has_data_files = j.value("has_data_files", false);
  r.persistent_id = j.value("persistent_id", "");
  return r;
}

std::string serialize_records(const std::vector<StudyRecord>& records) {
  Json arr = Json::array();
  for (const auto& r : records) arr.push_back(record_to_json(r));
  return arr.dump(2) + "\n";
}

Result<std::vector<StudyRecord>> parse_records(std::string_view raw, const std::string& file) {
  Json j = Json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_array())
    return Result<std::vector<StudyRecord>>::failure(
        {make_error("CAT_BAD_JSON", {file, 0, {}}, "catalog must be a JSON array")});
  std::vector<StudyRecord> out;
  std::vector<Issue> issues;
  for (std::size_t i = 0; i < j.size(); ++i) {
    auto r = record_from_json(j[i]);
    if (!r) {
      issues.push_back(make_error("CAT_BAD_JSON", {file, 0, "[" + std::to_string(i) + "]"}, "malformed record"));
      continue;
    }
    out.push_back(std::move(*r));
  }
  return finish(std::move(out), std::move(issues));
}

}  // namespace fairhub::catalog
