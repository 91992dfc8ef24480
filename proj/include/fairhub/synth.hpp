#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fairhub/catalog.hpp"
#include "fairhub/issue.hpp"
#include "fairhub/metadata.hpp"

namespace fairhub::synth {

/// Every draw uses the engine's raw output so that corpora are identical
/// across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}
  std::uint64_t next() { return eng_(); }
  /// Uniform in [0, n); n > 0.
  std::uint64_t below(std::uint64_t n) { return eng_() % n; }
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  bool chance(unsigned percent) { return below(100) < percent; }
  template <typename T>
  const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
  /// Distinct elements of `v`, between lo and hi of them, in `v` order.
  template <typename T>
  std::vector<T> subset(const std::vector<T>& v, std::size_t lo, std::size_t hi) {
    std::size_t n = static_cast<std::size_t>(between(static_cast<std::int64_t>(lo), static_cast<std::int64_t>(hi)));
    std::vector<bool> take(v.size(), false);
    while (n > 0) {
      auto i = below(v.size());
      if (!take[i]) {
        take[i] = true;
        --n;
      }
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (take[i]) out.push_back(v[i]);
    return out;
  }

 private:
  std::mt19937_64 eng_;
};

// Controlled vocabularies shared with the shipped study template.
const std::vector<std::string>& programs();
const std::vector<std::string>& institutes();
const std::vector<std::string>& study_domains();
const std::vector<std::string>& population_focus();
const std::vector<std::string>& collection_methods();
const std::vector<std::string>& study_designs();

/// A valid study instance with accession phs9NNNNN.
StudyMetadata random_study(Rng& rng, std::size_t index);
catalog::StudyRecord random_record(Rng& rng, std::size_t index);

struct Injection {
  std::size_t ssn = 0;
  std::size_t email = 0;
  std::size_t phone = 0;
  std::size_t type = 0;
  std::size_t enumeration = 0;
  std::size_t bounds = 0;
  std::size_t required = 0;
  std::size_t metadata = 0;  // at most 3

  std::size_t cells() const { return ssn + email + phone + type + enumeration + bounds + required; }
};

struct SynthSpec {
  std::uint64_t seed = 42;
  std::size_t n_studies = 1;
  std::size_t bundles_per_study = 1;
  std::size_t rows = 10;
  std::size_t variables = 12;  // total columns, at least kCoreColumns
  Injection inject;            // per bundle
};

inline constexpr std::size_t kCoreColumns = 8;

/// Issue code SYNTH_BAD_SPEC.
Result<SynthSpec> parse_spec(std::string_view raw, const std::string& file = {});
Json spec_to_json(const SynthSpec& s);

/// Ground truth: one entry per issue the validators must report.
struct LedgerEntry {
  std::string study;
  std::string file;  // "<bundle>/data.csv" or "<bundle>/meta.json"
  std::size_t row = 0;
  std::string column;
  std::string code;

  friend auto operator<=>(const LedgerEntry&, const LedgerEntry&) = default;
};

struct Corpus {
  std::map<std::string, std::string> files;  // path relative to the output dir
  std::vector<LedgerEntry> ledger;           // sorted
};

/// Layout: <accession>/{study.json, docs/protocol.txt, bundles/<name>/...}
/// plus ledger.json. Identical specs give identical bytes.
Corpus generate(const SynthSpec& spec);
void write_corpus(const Corpus& c, const std::filesystem::path& out);

Json ledger_to_json(const std::vector<LedgerEntry>& ledger);

}  // namespace fairhub::synth
