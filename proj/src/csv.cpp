#include "fairhub/csv.hpp"

#include <cstdint>

namespace fairhub::csv {

bool is_valid_utf8(std::string_view s) {
  std::size_t i = 0;
  const std::size_t n = s.size();
  while (i < n) {
    const auto c = static_cast<std::uint8_t>(s[i]);
    if (c < 0x80) {
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + len > n) return false;
    for (std::size_t k = 1; k < len; ++k) {
      const auto cc = static_cast<std::uint8_t>(s[i + k]);
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF)
      return false;
    i += len;
  }
  return true;
}

Result<Records> parse(std::string_view raw, const std::string& file_name) {
  Records out;
  std::vector<Issue> issues;

  if (raw.substr(0, 3) == "\xEF\xBB\xBF") raw.remove_prefix(3);
  if (!is_valid_utf8(raw)) {
    issues.push_back(make_error("CSV_BAD_ENCODING", {file_name, 0, {}}, "input is not valid UTF-8"));
    return Result<Records>::failure(std::move(issues));
  }

  std::string field;
  std::size_t record_no = 1;
  std::size_t i = 0;
  const std::size_t n = raw.size();
  bool reported_in_record = false;

  auto malformed = [&](std::string msg) {
    if (reported_in_record) return;
    reported_in_record = true;
    issues.push_back(make_error("CSV_MALFORMED", {file_name, record_no, {}}, std::move(msg)));
  };
  auto end_field = [&] { out.cells_.push_back(std::move(field)); field.clear(); };
  auto end_record = [&] {
    end_field();
    out.offsets_.push_back(out.cells_.size());
    ++record_no;
    reported_in_record = false;
  };

  while (i < n) {
    // start of a field
    if (raw[i] == '"') {
      ++i;
      bool closed = false;
      while (i < n) {
        const char c = raw[i];
        if (c == '"') {
          if (i + 1 < n && raw[i + 1] == '"') {
            field.push_back('"');
            i += 2;
          } else {
            ++i;
            closed = true;
            break;
          }
        } else {
          field.push_back(c);
          ++i;
        }
      }
      if (!closed) {
        malformed("unterminated quoted field");
        end_record();
        return finish(std::move(out), std::move(issues));
      }
      // text between the closing quote and the next delimiter is kept verbatim
      while (i < n && raw[i] != ',' && raw[i] != '\n' && !(raw[i] == '\r' && i + 1 < n && raw[i + 1] == '\n')) {
        malformed("characters after closing quote");
        field.push_back(raw[i]);
        ++i;
      }
    } else {
      while (i < n && raw[i] != ',' && raw[i] != '\n') {
        if (raw[i] == '\r' && i + 1 < n && raw[i + 1] == '\n') break;
        if (raw[i] == '"') malformed("quote inside unquoted field");
        field.push_back(raw[i]);
        ++i;
      }
    }

    if (i >= n) {
      end_record();
      break;
    }
    if (raw[i] == ',') {
      end_field();
      ++i;
      if (i >= n) {  // trailing comma at EOF still closes an empty last field
        end_record();
        break;
      }
      continue;
    }
    // line terminator
    i += raw[i] == '\r' ? 2 : 1;
    end_record();
  }

  return finish(std::move(out), std::move(issues));
}

bool needs_quoting(std::string_view field) {
  return field.find_first_of(",\"\r\n") != std::string_view::npos;
}

void append_field(std::string& out, std::string_view field) {
  if (!needs_quoting(field)) {
    out.append(field);
    return;
  }
  out.push_back('"');
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
}

void append_row(std::string& out, std::span<const std::string> fields) {
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (k) out.push_back(',');
    append_field(out, fields[k]);
  }
  out.push_back('\n');
}

}  // namespace fairhub::csv
