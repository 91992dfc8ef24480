#pragma once

// Random queries run against both the index and the full-scan oracle.

#include <sstream>

#include "catalog_oracle.hpp"
#include "fairhub/synth.hpp"

namespace trials {

using namespace fairhub;

struct Outcome {
  std::size_t queries = 0;
  std::string first_mismatch;  // empty when everything agreed
};

inline std::vector<catalog::StudyRecord> corpus(std::size_t n, std::uint64_t seed) {
  synth::Rng rng(seed);
  std::vector<catalog::StudyRecord> recs;
  for (std::size_t i = 0; i < n; ++i) recs.push_back(synth::random_record(rng, i));
  return recs;
}

inline Outcome run(std::size_t n_studies, std::size_t n_queries, std::uint64_t seed) {
  Outcome out;
  const auto recs = corpus(n_studies, seed);
  auto built = catalog::build_index(recs);
  if (!built) return {0, "index did not build"};
  const auto& idx = *built;
  synth::Rng rng(seed ^ 0x5eed);

  // words drawn from the corpus so that text queries hit something
  std::vector<std::string> vocab;
  for (const auto& r : recs)
    for (const auto& w : oracle::all_words(r)) vocab.push_back(w);
  std::sort(vocab.begin(), vocab.end());
  vocab.erase(std::unique(vocab.begin(), vocab.end()), vocab.end());

  const auto& fields = catalog::all_facet_fields();
  const std::vector<std::string> sorts = {"title", "accession", "cohort_size", "program", "release_date"};
  auto fail = [&](const std::string& what) {
    if (out.first_mismatch.empty()) out.first_mismatch = what;
  };

  for (std::size_t qn = 0; qn < n_queries && out.first_mismatch.empty(); ++qn) {
    std::string text;
    const auto n_terms = rng.below(3);
    for (std::size_t t = 0; t < n_terms && !vocab.empty(); ++t) {
      auto w = rng.pick(vocab);
      if (rng.chance(40) && w.size() > 2) w.resize(1 + rng.below(w.size() - 1));
      if (rng.chance(20)) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
      text += (t ? " " : "") + w;
    }
    std::vector<oracle::Filter> of;
    std::vector<std::pair<std::string, std::string>> qf;
    const auto n_filters = rng.below(4);
    for (std::size_t f = 0; f < n_filters; ++f) {
      const auto field = rng.pick(fields);
      std::string value;
      if (field == catalog::FacetField::cohort_size && rng.chance(50)) {
        const auto lo = rng.between(0, 8000);
        value = std::to_string(lo) + ".." + std::to_string(lo + rng.between(0, 6000));
      } else {
        const auto& r = recs[rng.below(recs.size())];
        const auto vs = oracle::values_of(r, field);
        if (vs.empty()) continue;
        value = rng.pick(vs);
      }
      of.push_back({field, value});
      qf.emplace_back(std::string(catalog::to_string(field)), value);
    }
    const auto sort = rng.pick(sorts);
    const bool desc = rng.chance(50);
    const std::size_t offset = rng.chance(70) ? 0 : rng.below(n_studies / 2 + 1);
    const std::size_t limit = 1 + rng.below(catalog::kMaxLimit);
    auto q = catalog::make_query(text, qf, sort + (desc ? ":desc" : ":asc"), offset, limit);
    if (!q) {
      fail("query rejected: " + text);
      break;
    }
    ++out.queries;

    // search, including order and paging
    const auto expect = oracle::search(recs, text, of, sort, desc);
    const auto res = catalog::search(idx, *q);
    std::vector<std::string> got;
    for (const auto* r : res.page) got.push_back(r->metadata.accession);
    std::vector<std::string> want;
    for (std::size_t i = offset; i < expect.size() && want.size() < limit; ++i) want.push_back(expect[i]);
    if (res.total != expect.size() || got != want) {
      std::ostringstream s;
      s << "search text='" << text << "' filters=" << of.size() << " sort=" << sort << (desc ? ":desc" : "")
        << " total " << res.total << " vs " << expect.size();
      fail(s.str());
    }

    // facet histogram, optionally stacked, under the same query
    const auto field = rng.pick(fields);
    std::optional<catalog::FacetField> stack;
    if (rng.chance(60)) {
      auto s = rng.pick(fields);
      if (!catalog::is_multi_valued(s)) stack = s;
    }
    auto h = catalog::facet_histogram(idx, field, stack, &*q);
    if (!h) {
      fail("histogram rejected");
      continue;
    }
    const auto want_h = oracle::histogram(recs, field, stack ? &*stack : nullptr, text, of);
    oracle::Counts got_h;
    for (const auto& row : h->rows) {
      std::size_t stacked = 0;
      for (const auto& [sv, n] : row.stacks) stacked += n;
      if (stack && stacked != row.total) fail("stacks do not sum to the total for " + row.value);
      std::map<std::string, std::size_t> nonzero;
      for (const auto& [sv, n] : row.stacks)
        if (n) nonzero[sv] = n;
      got_h[row.value] = {row.total, nonzero};
    }
    if (got_h != want_h) fail("histogram for " + std::string(catalog::to_string(field)));

    // autocomplete
    std::string prefix = vocab.empty() ? "" : rng.pick(vocab);
    prefix.resize(std::min<std::size_t>(prefix.size(), rng.below(4)));
    const std::size_t k = 1 + rng.below(20);
    if (catalog::autocomplete(idx, prefix, k) != oracle::complete(recs, prefix, k))
      fail("autocomplete '" + prefix + "'");
  }
  return out;
}

}  // namespace trials
