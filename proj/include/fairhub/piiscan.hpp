#pragma once

#include <boost/regex.hpp>

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "fairhub/issue.hpp"
#include "fairhub/tabledata.hpp"

namespace fairhub::pii {

enum class DetectorKind { cell_pattern, column_name };
enum class Confidence { high, medium };

std::string_view to_string(DetectorKind k);
std::string_view to_string(Confidence c);

/// Necessary conditions a cell must meet before the regex runs. Every field
/// must be implied by the pattern itself; the prefilter never changes results.
struct Prefilter {
  std::size_t min_digits = 0;
  bool needs_at = false;
  bool needs_dash = false;
  bool needs_space = false;
  bool needs_alpha = false;
};

class Detector {
 public:
  /// Compiles `pattern` (Perl syntax). Column-name detectors match case-insensitively.
  /// Throws boost::regex_error when the pattern does not compile.
  Detector(std::string id, DetectorKind kind, std::string pattern, Confidence confidence,
           Prefilter prefilter = {});

  const std::string& id() const { return id_; }
  DetectorKind kind() const { return kind_; }
  const std::string& pattern() const { return pattern_; }
  Confidence confidence() const { return confidence_; }
  const Prefilter& prefilter() const { return prefilter_; }

  /// Returns the first matched token, or an empty view when nothing matches.
  std::string_view search(std::string_view text) const;

 private:
  std::string id_;
  DetectorKind kind_;
  std::string pattern_;
  Confidence confidence_;
  Prefilter prefilter_;
  std::shared_ptr<const boost::regex> regex_;
};

struct Finding {
  std::string detector_id;
  std::size_t row = 0;  // file row; 1 for column-name findings
  std::string column;
  std::string excerpt;  // masked
  Confidence confidence = Confidence::medium;
  DetectorKind kind = DetectorKind::cell_pattern;

  friend bool operator==(const Finding&, const Finding&) = default;
};

/// ssn, email, phone, zip_plus4, street_address (cells) and column_name,
/// column_ssn, column_address, column_phone, column_email, column_dob (headers).
std::vector<Detector> builtin_detectors();

/// Keeps the first and last code point of `token` and masks the rest; tokens
/// of one or two code points are masked entirely.
std::string mask_excerpt(std::string_view token);

struct ScanOptions {
  /// Ignore prefilters and run every regex on every cell.
  bool exhaustive = false;
};

/// Findings sorted by (row, column, detector id).
std::vector<Finding> scan_table(const Table& t, const std::vector<Detector>& detectors,
                                const ScanOptions& opts = {});

/// Issue code PII_<DETECTOR_ID>; error for high-confidence cell findings,
/// warning otherwise.
Issue to_issue(const Finding& f, const std::string& file);
bool is_blocking(const Finding& f);

}  // namespace fairhub::pii
