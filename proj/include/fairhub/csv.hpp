#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fairhub/issue.hpp"

namespace fairhub::csv {

/// Records parsed from RFC 4180 text, stored as one flat cell array.
class Records {
 public:
  std::size_t size() const { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  bool empty() const { return size() == 0; }
  std::span<const std::string> record(std::size_t i) const {
    return {cells_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }
  std::size_t width(std::size_t i) const { return offsets_[i + 1] - offsets_[i]; }

  std::vector<std::string>& cells() { return cells_; }
  const std::vector<std::string>& cells() const { return cells_; }

 private:
  friend Result<Records> parse(std::string_view, const std::string&);
  std::vector<std::string> cells_;
  std::vector<std::size_t> offsets_{0};
};

/// Parses UTF-8 CSV. LF and CRLF are both accepted, a leading BOM is skipped
/// and a final line terminator does not open a new record.
/// Issue codes: CSV_MALFORMED, CSV_BAD_ENCODING.
Result<Records> parse(std::string_view raw, const std::string& file_name = {});

bool needs_quoting(std::string_view field);
void append_field(std::string& out, std::string_view field);
void append_row(std::string& out, std::span<const std::string> fields);

bool is_valid_utf8(std::string_view s);

}  // namespace fairhub::csv
