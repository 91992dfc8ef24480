#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairhub/bundle.hpp"
#include "fairhub/issue.hpp"
#include "json.hpp"

namespace fairhub::deid {

/// Secret used for every keyed derivation. Never serialized.
class SecretKey {
 public:
  static constexpr std::size_t kMinBytes = 16;

  /// Throws std::invalid_argument when shorter than kMinBytes.
  explicit SecretKey(std::vector<std::uint8_t> bytes);
  /// nullopt when `hex` is not valid hex or decodes to fewer than kMinBytes.
  static std::optional<SecretKey> from_hex(std::string_view hex);

  std::span<const std::uint8_t> bytes() const { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

enum class ShiftScope { per_study, per_participant };

/// Conventional list of three-digit ZIP prefixes whose areas hold 20,000 or
/// fewer people. A configurable default, not census-derived at run time.
const std::set<std::string>& default_restricted_zip3();

struct DeidConfig {
  std::set<std::string> restricted_zip3 = default_restricted_zip3();
  ShiftScope date_shift_scope = ShiftScope::per_study;
  std::string id_column;
  std::set<std::string> direct_identifier_columns;
  std::set<std::string> zip_columns;
  std::set<std::string> date_columns;
  std::set<std::string> age_columns;
  std::set<std::string> site_columns;
};

/// JSON config without the key. Issue code DEID_BAD_CONFIG.
Result<DeidConfig> parse_config(std::string_view raw, const std::string& file = {});
nlohmann::json config_to_json(const DeidConfig& cfg);

/// Pairwise-disjoint column sets; id_column set for per-participant scope.
std::vector<Issue> validate_config(const DeidConfig& cfg);

struct DeidReport {
  std::size_t cells_redacted = 0;
  std::size_t zips_generalized = 0;
  std::size_t zips_zeroed = 0;
  std::size_t dates_shifted = 0;
  std::size_t ages_altered = 0;
  std::size_t sites_pseudonymized = 0;
  std::map<std::string, int> shift_offsets;  // scope key -> days
  bool deid_applied = false;

  friend bool operator==(const DeidReport&, const DeidReport&) = default;
};

nlohmann::json report_to_json(const DeidReport& r);

struct ZipResult {
  std::string value;
  bool malformed = false;
};

/// First three digits of a five-digit ZIP, "000" for restricted prefixes and
/// for anything that is not exactly five digits.
ZipResult generalize_zip(std::string_view zip, const std::set<std::string>& restricted);

/// Keyed offset in [-180, -1] ∪ [1, 180].
int derive_date_shift(std::string_view scope_key, const SecretKey& key);

std::chrono::year_month_day shift_date(std::chrono::year_month_day d, int offset_days);

/// <1 → 0; rounded 1..20 unchanged; rounded 21..89 → ±2 (keyed sign per
/// subject); rounded ≥90 → 90. Precondition: age ≥ 0.
int transform_age(double age, std::string_view subject_key, const SecretKey& key);

/// "SITE-" + six lowercase hex characters of a keyed hash of the trimmed name.
std::string pseudonymize_site(std::string_view site, const SecretKey& key);

struct DeidOutput {
  FileBundle bundle;
  DeidReport report;
};

/// Issue codes: DEID_ALREADY_APPLIED, DEID_UNKNOWN_COLUMN, DEID_BAD_CONFIG
/// (errors, no output); DEID_BAD_ZIP, DEID_BAD_DATE, DEID_BAD_AGE,
/// DEID_EMPTY_SITE (warnings, output produced).
Result<DeidOutput> deidentify_bundle(FileBundle bundle, const DeidConfig& cfg,
                                     const SecretKey& key, const MissingPolicy& missing = {});

}  // namespace fairhub::deid
