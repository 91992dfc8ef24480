#include "fairhub/piiscan.hpp"

#include <algorithm>
#include <tuple>

namespace fairhub::pii {

std::string_view to_string(DetectorKind k) {
  return k == DetectorKind::cell_pattern ? "cell-pattern" : "column-name";
}

std::string_view to_string(Confidence c) { return c == Confidence::high ? "high" : "medium"; }

Detector::Detector(std::string id, DetectorKind kind, std::string pattern, Confidence confidence,
                   Prefilter prefilter)
    : id_(std::move(id)),
      kind_(kind),
      pattern_(std::move(pattern)),
      confidence_(confidence),
      prefilter_(prefilter) {
  boost::regex::flag_type flags = boost::regex::perl;
  if (kind_ == DetectorKind::column_name) flags |= boost::regex::icase;
  regex_ = std::make_shared<const boost::regex>(pattern_, flags);
}

std::string_view Detector::search(std::string_view text) const {
  boost::match_results<std::string_view::const_iterator> m;
  if (!boost::regex_search(text.begin(), text.end(), m, *regex_)) return {};
  return text.substr(static_cast<std::size_t>(m[0].first - text.begin()),
                     static_cast<std::size_t>(m[0].length()));
}

std::vector<Detector> builtin_detectors() {
  using K = DetectorKind;
  using C = Confidence;
  std::vector<Detector> d;
  d.emplace_back("ssn", K::cell_pattern, R"((?<!\d)\d{3}-\d{2}-\d{4}(?!\d))", C::high,
                 Prefilter{.min_digits = 9, .needs_dash = true});
  d.emplace_back("email", K::cell_pattern, R"([A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,})",
                 C::high, Prefilter{.needs_at = true});
  d.emplace_back("phone", K::cell_pattern,
                 R"((?<!\d)(?:\(\d{3}\)\s?|\d{3}[-.\s])\d{3}[-.\s]\d{4}(?!\d))", C::high,
                 Prefilter{.min_digits = 10});
  d.emplace_back("zip_plus4", K::cell_pattern, R"((?<!\d)\d{5}-\d{4}(?!\d))", C::high,
                 Prefilter{.min_digits = 9, .needs_dash = true});
  d.emplace_back("street_address", K::cell_pattern,
                 R"((?i)(?<![\w])\d{1,6}\s+(?:[a-z0-9.']+\s+){1,4}(?:street|st|avenue|ave|road|rd|boulevard|blvd|lane|ln|drive|dr|court|ct|way|place|pl|terrace|circle|cir|highway|hwy)\b\.?)",
                 C::medium, Prefilter{.min_digits = 1, .needs_space = true, .needs_alpha = true});
  for (const char* word : {"name", "ssn", "address", "phone", "email", "dob"})
    d.emplace_back(std::string("column_") + word, K::column_name, word, C::medium);
  return d;
}

std::string mask_excerpt(std::string_view token) {
  // split into UTF-8 code points
  std::vector<std::string_view> cps;
  for (std::size_t i = 0; i < token.size();) {
    const auto c = static_cast<unsigned char>(token[i]);
    std::size_t len = c < 0x80 ? 1 : (c & 0xE0) == 0xC0 ? 2 : (c & 0xF0) == 0xE0 ? 3 : 4;
    len = std::min(len, token.size() - i);
    cps.push_back(token.substr(i, len));
    i += len;
  }
  if (cps.size() <= 2) return "***";
  return std::string(cps.front()) + "***" + std::string(cps.back());
}

namespace {

struct CellProfile {
  std::size_t digits = 0;
  bool at = false;
  bool dash = false;
  bool space = false;
  bool alpha = false;
};

CellProfile profile(std::string_view cell) {
  CellProfile p;
  for (char ch : cell) {
    if (ch >= '0' && ch <= '9') ++p.digits;
    else if (ch == '@') p.at = true;
    else if (ch == '-') p.dash = true;
    else if (ch == ' ' || ch == '\t') p.space = true;
    else if ((ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z')) p.alpha = true;
  }
  return p;
}

bool admits(const Prefilter& f, const CellProfile& p) {
  return p.digits >= f.min_digits && (!f.needs_at || p.at) && (!f.needs_dash || p.dash) &&
         (!f.needs_space || p.space) && (!f.needs_alpha || p.alpha);
}

}  // namespace

std::vector<Finding> scan_table(const Table& t, const std::vector<Detector>& detectors,
                                const ScanOptions& opts) {
  std::vector<Finding> findings;
  std::vector<const Detector*> cell_detectors;
  for (const auto& d : detectors) {
    if (d.kind() == DetectorKind::cell_pattern) {
      cell_detectors.push_back(&d);
      continue;
    }
    for (const auto& name : t.header()) {
      auto hit = d.search(name);
      if (!hit.empty())
        findings.push_back({d.id(), 1, name, mask_excerpt(hit), d.confidence(), d.kind()});
    }
  }

  if (!cell_detectors.empty()) {
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
      for (std::size_t c = 0; c < t.n_cols(); ++c) {
        const std::string& cell = t.cell(r, c);
        if (cell.empty()) continue;
        const CellProfile p = profile(cell);
        for (const Detector* d : cell_detectors) {
          if (!opts.exhaustive && !admits(d->prefilter(), p)) continue;
          auto hit = d->search(cell);
          if (!hit.empty())
            findings.push_back({d->id(), file_row(r), t.header()[c], mask_excerpt(hit),
                                d->confidence(), d->kind()});
        }
      }
    }
  }

  std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
    return std::tie(a.row, a.column, a.detector_id) < std::tie(b.row, b.column, b.detector_id);
  });
  return findings;
}

bool is_blocking(const Finding& f) {
  return f.kind == DetectorKind::cell_pattern && f.confidence == Confidence::high;
}

Issue to_issue(const Finding& f, const std::string& file) {
  std::string code = "PII_";
  for (char c : f.detector_id) code.push_back(c >= 'a' && c <= 'z' ? static_cast<char>(c - 32) : c);
  std::string msg = "possible " + f.detector_id + " (" + std::string(to_string(f.confidence)) +
                    " confidence): " + f.excerpt;
  Location loc{file, f.row, f.column};
  return is_blocking(f) ? make_error(std::move(code), std::move(loc), std::move(msg))
                        : make_warning(std::move(code), std::move(loc), std::move(msg));
}

}  // namespace fairhub::pii
