#pragma once

// Full-scan reference for search, facets, autocomplete and histograms.
// Nothing here calls into the index.

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fairhub/catalog.hpp"

namespace oracle {

using fairhub::catalog::FacetField;
using fairhub::catalog::StudyRecord;

inline std::vector<std::string> words(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : s) {
    if (std::isalnum(c) && c < 0x80) {
      cur += static_cast<char>(std::tolower(c));
    } else if (c >= 0x80) {
      cur += static_cast<char>(c);
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::set<std::string> all_words(const StudyRecord& r) {
  std::set<std::string> out;
  auto add = [&](const std::string& s) {
    for (auto& w : words(s)) out.insert(w);
  };
  add(r.metadata.title);
  add(r.metadata.principal_investigator);
  for (const auto& k : r.metadata.keywords) add(k);
  for (const auto& d : r.metadata.study_domains) add(d);
  return out;
}

inline std::string bucket(long long n) {
  if (n < 100) return "0-99";
  if (n < 500) return "100-499";
  if (n < 1000) return "500-999";
  if (n < 5000) return "1000-4999";
  if (n < 10000) return "5000-9999";
  return "10000+";
}

inline std::vector<std::string> values_of(const StudyRecord& r, FacetField f) {
  const auto& m = r.metadata;
  auto single = [](const std::string& s) { return std::vector<std::string>{s.empty() ? "(none)" : s}; };
  auto multi = [](auto begin, auto end) {
    std::set<std::string> s;
    for (auto it = begin; it != end; ++it)
      if (!it->empty()) s.insert(*it);
    return std::vector<std::string>(s.begin(), s.end());
  };
  switch (f) {
    case FacetField::program: return single(m.program);
    case FacetField::nih_institute: return single(m.nih_institute);
    case FacetField::study_design: return single(m.study_design);
    case FacetField::cohort_size: return {bucket(m.estimated_cohort_size)};
    case FacetField::has_data_files: return {r.has_data_files ? "true" : "false"};
    case FacetField::study_domains: return multi(m.study_domains.begin(), m.study_domains.end());
    case FacetField::population_focus: return multi(m.population_focus.begin(), m.population_focus.end());
    case FacetField::data_collection_methods:
      return multi(m.data_collection_methods.begin(), m.data_collection_methods.end());
    case FacetField::variables: return multi(r.variables.begin(), r.variables.end());
  }
  return {};
}

struct Filter {
  FacetField field;
  std::string value;  // a facet value, or "lo..hi" for cohort size
};

inline bool matches(const StudyRecord& r, const std::string& text, const std::vector<Filter>& filters) {
  const auto ws = all_words(r);
  for (const auto& term : words(text)) {
    bool hit = false;
    for (const auto& w : ws) hit |= w.compare(0, term.size(), term) == 0;
    if (!hit) return false;
  }
  std::map<FacetField, bool> ok;
  for (const auto& f : filters) {
    bool hit = false;
    const auto dots = f.value.find("..");
    if (f.field == FacetField::cohort_size && dots != std::string::npos) {
      const long long lo = std::stoll(f.value.substr(0, dots));
      const long long hi = std::stoll(f.value.substr(dots + 2));
      hit = r.metadata.estimated_cohort_size >= lo && r.metadata.estimated_cohort_size <= hi;
    } else {
      for (const auto& v : values_of(r, f.field)) hit |= v == f.value;
    }
    ok[f.field] = ok[f.field] || hit;
  }
  for (const auto& [field, hit] : ok)
    if (!hit) return false;
  return true;
}

// Accessions in result order.
inline std::vector<std::string> search(const std::vector<StudyRecord>& recs, const std::string& text,
                                       const std::vector<Filter>& filters, const std::string& sort, bool desc) {
  std::vector<const StudyRecord*> hits;
  for (const auto& r : recs)
    if (matches(r, text, filters)) hits.push_back(&r);
  auto key_less = [&](const StudyRecord* a, const StudyRecord* b) {
    const auto& x = a->metadata;
    const auto& y = b->metadata;
    if (sort == "title") return x.title < y.title;
    if (sort == "program") return x.program < y.program;
    if (sort == "release_date") return x.release_date < y.release_date;
    if (sort == "cohort_size") return x.estimated_cohort_size < y.estimated_cohort_size;
    return x.accession < y.accession;
  };
  std::sort(hits.begin(), hits.end(), [&](const StudyRecord* a, const StudyRecord* b) {
    const bool lt = desc ? key_less(b, a) : key_less(a, b);
    const bool gt = desc ? key_less(a, b) : key_less(b, a);
    if (lt != gt) return lt;
    if (sort == "accession" && desc) return a->metadata.accession > b->metadata.accession;
    return a->metadata.accession < b->metadata.accession;
  });
  std::vector<std::string> out;
  for (const auto* r : hits) out.push_back(r->metadata.accession);
  return out;
}

// value -> (total, stack value -> count)
using Counts = std::map<std::string, std::pair<std::size_t, std::map<std::string, std::size_t>>>;

inline Counts histogram(const std::vector<StudyRecord>& recs, FacetField field, const FacetField* stack,
                        const std::string& text, const std::vector<Filter>& filters) {
  Counts out;
  for (const auto& r : recs) {
    if (!matches(r, text, filters)) continue;
    for (const auto& v : values_of(r, field)) {
      auto& [total, stacks] = out[v];
      ++total;
      if (stack)
        for (const auto& s : values_of(r, *stack)) ++stacks[s];
    }
  }
  return out;
}

inline std::vector<std::string> complete(const std::vector<StudyRecord>& recs, const std::string& prefix,
                                         std::size_t k) {
  std::string p;
  for (unsigned char c : prefix) p += static_cast<char>(c < 0x80 ? std::tolower(c) : c);
  std::set<std::string> all;
  for (const auto& r : recs)
    for (const auto& w : all_words(r))
      if (w.compare(0, p.size(), p) == 0) all.insert(w);
  std::vector<std::string> out(all.begin(), all.end());
  if (out.size() > k) out.resize(k);
  return out;
}

}  // namespace oracle
