#include "fairhub/deid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fairhub/crypto.hpp"
#include "fairhub/values.hpp"

namespace fairhub::deid {

namespace {

constexpr std::string_view kRedacted = "[REDACTED]";

crypto::Digest keyed(const SecretKey& key, std::string_view domain, std::string_view value) {
  std::string msg = "fairhub:";
  msg += domain;
  msg += ':';
  msg += value;
  return crypto::hmac_sha256(key.bytes(), msg);
}

bool five_digits(std::string_view s) {
  if (s.size() != 5) return false;
  for (char c : s)
    if (c < '0' || c > '9') return false;
  return true;
}

std::set<std::string> string_set(const nlohmann::json& j, const char* field,
                                 std::vector<Issue>& issues, const std::string& file) {
  std::set<std::string> out;
  if (!j.contains(field)) return out;
  const auto& arr = j.at(field);
  if (!arr.is_array()) {
    issues.push_back(make_error("DEID_BAD_CONFIG", {file, 0, field}, "expected an array of strings"));
    return out;
  }
  for (const auto& v : arr) {
    if (!v.is_string()) {
      issues.push_back(make_error("DEID_BAD_CONFIG", {file, 0, field}, "expected an array of strings"));
      continue;
    }
    out.insert(v.get<std::string>());
  }
  return out;
}

}  // namespace

SecretKey::SecretKey(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  if (bytes_.size() < kMinBytes) throw std::invalid_argument("de-identification key shorter than 16 bytes");
}

std::optional<SecretKey> SecretKey::from_hex(std::string_view hex) {
  auto bytes = crypto::from_hex(values::trim(hex));
  if (!bytes || bytes->size() < kMinBytes) return std::nullopt;
  return SecretKey(std::move(*bytes));
}

const std::set<std::string>& default_restricted_zip3() {
  static const std::set<std::string> kList = {"036", "059", "063", "102", "203", "556",
                                              "692", "790", "821", "823", "830", "831",
                                              "878", "879", "884", "890", "893"};
  return kList;
}

Result<DeidConfig> parse_config(std::string_view raw, const std::string& file) {
  std::vector<Issue> issues;
  nlohmann::json j = nlohmann::json::parse(raw, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    issues.push_back(make_error("DEID_BAD_CONFIG", {file, 0, {}}, "config is not a JSON object"));
    return Result<DeidConfig>::failure(std::move(issues));
  }
  DeidConfig cfg;
  if (j.contains("restricted_zip3")) cfg.restricted_zip3 = string_set(j, "restricted_zip3", issues, file);
  for (const auto& z : cfg.restricted_zip3)
    if (z.size() != 3 || !std::all_of(z.begin(), z.end(), [](char c) { return c >= '0' && c <= '9'; }))
      issues.push_back(make_error("DEID_BAD_CONFIG", {file, 0, "restricted_zip3"}, "'" + z + "' is not a 3-digit prefix"));
  if (j.contains("date_shift_scope")) {
    const auto& s = j.at("date_shift_scope");
    if (s == "per-study") cfg.date_shift_scope = ShiftScope::per_study;
    else if (s == "per-participant") cfg.date_shift_scope = ShiftScope::per_participant;
    else issues.push_back(make_error("DEID_BAD_CONFIG", {file, 0, "date_shift_scope"}, "expected per-study or per-participant"));
  }
  if (j.contains("id_column")) {
    if (j.at("id_column").is_string()) cfg.id_column = j.at("id_column").get<std::string>();
    else issues.push_back(make_error("DEID_BAD_CONFIG", {file, 0, "id_column"}, "expected a string"));
  }
  cfg.direct_identifier_columns = string_set(j, "direct_identifier_columns", issues, file);
  cfg.zip_columns = string_set(j, "zip_columns", issues, file);
  cfg.date_columns = string_set(j, "date_columns", issues, file);
  cfg.age_columns = string_set(j, "age_columns", issues, file);
  cfg.site_columns = string_set(j, "site_columns", issues, file);
  for (const auto& is : validate_config(cfg)) issues.push_back(is);
  return finish(std::move(cfg), std::move(issues));
}

nlohmann::json config_to_json(const DeidConfig& cfg) {
  return {{"restricted_zip3", cfg.restricted_zip3},
          {"date_shift_scope", cfg.date_shift_scope == ShiftScope::per_study ? "per-study" : "per-participant"},
          {"id_column", cfg.id_column},
          {"direct_identifier_columns", cfg.direct_identifier_columns},
          {"zip_columns", cfg.zip_columns},
          {"date_columns", cfg.date_columns},
          {"age_columns", cfg.age_columns},
          {"site_columns", cfg.site_columns}};
}

std::vector<Issue> validate_config(const DeidConfig& cfg) {
  std::vector<Issue> issues;
  const std::pair<const char*, const std::set<std::string>*> sets[] = {
      {"direct_identifier_columns", &cfg.direct_identifier_columns},
      {"zip_columns", &cfg.zip_columns},
      {"date_columns", &cfg.date_columns},
      {"age_columns", &cfg.age_columns},
      {"site_columns", &cfg.site_columns}};
  std::map<std::string, const char*> owner;
  for (const auto& [name, set] : sets) {
    for (const auto& col : *set) {
      auto [it, inserted] = owner.emplace(col, name);
      if (!inserted)
        issues.push_back(make_error("DEID_BAD_CONFIG", {{}, 0, col},
                                    "column listed in both " + std::string(it->second) + " and " + name));
    }
  }
  if (cfg.date_shift_scope == ShiftScope::per_participant && cfg.id_column.empty())
    issues.push_back(make_error("DEID_BAD_CONFIG", {{}, 0, "id_column"}, "per-participant scope needs id_column"));
  if (!cfg.id_column.empty() && owner.contains(cfg.id_column))
    issues.push_back(make_error("DEID_BAD_CONFIG", {{}, 0, cfg.id_column}, "id_column cannot also be transformed"));
  sort_issues(issues);
  return issues;
}

nlohmann::json report_to_json(const DeidReport& r) {
  return {{"cells_redacted", r.cells_redacted},       {"zips_generalized", r.zips_generalized},
          {"zips_zeroed", r.zips_zeroed},             {"dates_shifted", r.dates_shifted},
          {"ages_altered", r.ages_altered},           {"sites_pseudonymized", r.sites_pseudonymized},
          {"shift_offsets", r.shift_offsets},         {"deid_applied", r.deid_applied}};
}

ZipResult generalize_zip(std::string_view zip, const std::set<std::string>& restricted) {
  if (!five_digits(zip)) return {"000", true};
  std::string prefix(zip.substr(0, 3));
  if (restricted.contains(prefix)) return {"000", false};
  return {std::move(prefix), false};
}

int derive_date_shift(std::string_view scope_key, const SecretKey& key) {
  const auto h = keyed(key, "date-shift", scope_key);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = (v << 8) | h[static_cast<std::size_t>(i)];
  const auto m = static_cast<int>(v % 360);
  return m < 180 ? -(m + 1) : m - 179;
}

std::chrono::year_month_day shift_date(std::chrono::year_month_day d, int offset_days) {
  return std::chrono::year_month_day{std::chrono::sys_days{d} + std::chrono::days{offset_days}};
}

int transform_age(double age, std::string_view subject_key, const SecretKey& key) {
  if (age < 1.0) return 0;
  const auto rounded = static_cast<int>(std::min(std::round(age), 1000.0));
  if (rounded <= 20) return rounded;
  if (rounded >= 90) return 90;
  const bool subtract = keyed(key, "age-sign", subject_key)[0] & 1;
  return subtract ? rounded - 2 : rounded + 2;
}

std::string pseudonymize_site(std::string_view site, const SecretKey& key) {
  const auto h = keyed(key, "site", values::trim(site));
  return "SITE-" + crypto::to_hex(std::span<const std::uint8_t>(h.data(), 3));
}

Result<DeidOutput> deidentify_bundle(FileBundle bundle, const DeidConfig& cfg,
                                     const SecretKey& key, const MissingPolicy& missing) {
  std::vector<Issue> issues = validate_config(cfg);
  const std::string& file = bundle.file_metadata.file_name;
  for (auto& is : issues) is.location.file = file;

  if (bundle.file_metadata.deid_applied)
    issues.push_back(make_error("DEID_ALREADY_APPLIED", {file, 0, {}}, "bundle is already de-identified"));

  Table& t = bundle.table;
  auto require_column = [&](const std::string& col) {
    if (!t.column_index(col))
      issues.push_back(make_error("DEID_UNKNOWN_COLUMN", {file, 1, col}, "configured column not in table"));
  };
  for (const auto* set : {&cfg.direct_identifier_columns, &cfg.zip_columns, &cfg.date_columns,
                          &cfg.age_columns, &cfg.site_columns})
    for (const auto& col : *set) require_column(col);
  if (!cfg.id_column.empty()) require_column(cfg.id_column);
  if (has_errors(issues)) return finish(DeidOutput{}, std::move(issues));

  DeidReport report;
  const std::optional<std::size_t> id_col =
      cfg.id_column.empty() ? std::nullopt : t.column_index(cfg.id_column);
  auto subject_of = [&](std::size_t r) -> std::string {
    return id_col ? t.cell(r, *id_col) : "row:" + std::to_string(r + 1);
  };

  // direct identifiers: every cell, missing included
  for (const auto& col : cfg.direct_identifier_columns) {
    const std::size_t c = *t.column_index(col);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      t.cell(r, c) = kRedacted;
      ++report.cells_redacted;
    }
  }

  for (const auto& col : cfg.zip_columns) {
    const std::size_t c = *t.column_index(col);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      std::string& cell = t.cell(r, c);
      if (missing.is_missing(cell)) continue;
      auto z = generalize_zip(cell, cfg.restricted_zip3);
      if (z.malformed) {
        issues.push_back(make_warning("DEID_BAD_ZIP", {file, file_row(r), col}, "ZIP is not five digits; replaced with 000"));
        ++report.zips_zeroed;
      } else if (z.value == "000") {
        ++report.zips_zeroed;
      } else {
        ++report.zips_generalized;
      }
      cell = std::move(z.value);
    }
  }

  if (!cfg.date_columns.empty()) {
    const std::string study_scope =
        bundle.file_metadata.study.empty() ? file : bundle.file_metadata.study;
    std::map<std::string, int> offsets;
    auto offset_for = [&](const std::string& scope) {
      auto it = offsets.find(scope);
      if (it == offsets.end()) it = offsets.emplace(scope, derive_date_shift(scope, key)).first;
      return it->second;
    };
    for (const auto& col : cfg.date_columns) {
      const std::size_t c = *t.column_index(col);
      for (std::size_t r = 0; r < t.n_rows(); ++r) {
        std::string& cell = t.cell(r, c);
        if (missing.is_missing(cell)) continue;
        std::string scope = study_scope;
        if (cfg.date_shift_scope == ShiftScope::per_participant) {
          scope = t.cell(r, *id_col);
          if (missing.is_missing(scope)) {
            issues.push_back(make_warning("DEID_BAD_DATE", {file, file_row(r), col}, "no participant id for date shift; value blanked"));
            cell.clear();
            continue;
          }
        }
        const int offset = offset_for(scope);
        if (auto d = values::parse_date(cell)) {
          cell = values::format_date(shift_date(*d, offset));
        } else if (auto dt = values::parse_datetime(cell)) {
          dt->date = shift_date(dt->date, offset);
          cell = values::format_datetime(*dt);
        } else {
          issues.push_back(make_warning("DEID_BAD_DATE", {file, file_row(r), col}, "value is not a date; blanked"));
          cell.clear();
          continue;
        }
        ++report.dates_shifted;
      }
    }
    report.shift_offsets = std::move(offsets);
  }

  for (const auto& col : cfg.age_columns) {
    const std::size_t c = *t.column_index(col);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      std::string& cell = t.cell(r, c);
      if (missing.is_missing(cell)) continue;
      auto age = values::parse_decimal(cell);
      if (!age || *age < 0) {
        issues.push_back(make_warning("DEID_BAD_AGE", {file, file_row(r), col}, "age is negative or not numeric; blanked"));
        cell.clear();
        continue;
      }
      const int out = transform_age(*age, subject_of(r), key);
      if (static_cast<double>(out) != *age) ++report.ages_altered;
      cell = std::to_string(out);
    }
  }

  for (const auto& col : cfg.site_columns) {
    const std::size_t c = *t.column_index(col);
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      std::string& cell = t.cell(r, c);
      if (missing.is_missing(cell)) continue;
      if (values::trim(cell).empty())
        issues.push_back(make_warning("DEID_EMPTY_SITE", {file, file_row(r), col}, "blank site name pseudonymized"));
      cell = pseudonymize_site(cell, key);
      ++report.sites_pseudonymized;
    }
  }

  // dictionary follows the transformed value domains
  for (auto& v : bundle.dictionary.variables) {
    auto reset = [&](Datatype t, std::optional<std::string> pattern) {
      v.datatype = t;
      v.enumeration.clear();
      v.pattern = std::move(pattern);
      v.min.reset();
      v.max.reset();
    };
    if (cfg.direct_identifier_columns.contains(v.id)) reset(Datatype::string, std::nullopt);
    else if (cfg.zip_columns.contains(v.id)) reset(Datatype::string, "[0-9]{3}");
    else if (cfg.age_columns.contains(v.id)) reset(Datatype::integer, std::nullopt);
    else if (cfg.site_columns.contains(v.id)) reset(Datatype::string, "SITE-[0-9a-f]{6}");
  }

  report.deid_applied = true;
  bundle.file_metadata.deid_applied = true;
  return finish(DeidOutput{std::move(bundle), std::move(report)}, std::move(issues));
}

}  // namespace fairhub::deid
