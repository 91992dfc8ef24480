#include <doctest.h>

#include <random>

#include "fairhub/piiscan.hpp"

using namespace fairhub;

namespace {

std::vector<std::string> ids(const std::vector<pii::Finding>& fs) {
  std::vector<std::string> out;
  for (const auto& f : fs) out.push_back(f.detector_id);
  return out;
}

}  // namespace

TEST_CASE("builtin detectors fire on typical values") {
  const auto dets = pii::builtin_detectors();
  auto one = [&](const std::string& cell) {
    return ids(pii::scan_table(Table::from_rows({"c"}, {{cell}}), dets));
  };
  CHECK(one("ssn 123-45-6789 here") == std::vector<std::string>{"ssn"});
  CHECK(one("mail a.b@example.org") == std::vector<std::string>{"email"});
  CHECK(one("(555) 123-4567") == std::vector<std::string>{"phone"});
  CHECK(one("555-123-4567") == std::vector<std::string>{"phone"});
  CHECK(one("94305-1234") == std::vector<std::string>{"zip_plus4"});
  CHECK(one("lives at 12 Oak Street") == std::vector<std::string>{"street_address"});
  CHECK(one("2021-03-04").empty());
  CHECK(one("12345").empty());
  CHECK(one("score 42").empty());
}

TEST_CASE("column-name detectors and blocking") {
  const auto dets = pii::builtin_detectors();
  auto t = Table::from_rows({"participant_name", "Home_Address", "dob", "score"}, {{"x", "y", "z", "1"}});
  auto fs = pii::scan_table(t, dets);
  REQUIRE(fs.size() == 3);
  for (const auto& f : fs) {
    CHECK(f.row == 1);
    CHECK(f.kind == pii::DetectorKind::column_name);
    CHECK_FALSE(pii::is_blocking(f));
    CHECK(pii::to_issue(f, "d.csv").severity == Severity::warning);
  }
  auto ssn = pii::scan_table(Table::from_rows({"notes"}, {{"a"}, {"123-45-6789"}}), dets);
  REQUIRE(ssn.size() == 1);
  CHECK(ssn[0].row == 3);
  CHECK(pii::is_blocking(ssn[0]));
  const auto issue = pii::to_issue(ssn[0], "d.csv");
  CHECK(issue.code == "PII_SSN");
  CHECK(issue.severity == Severity::error);
  CHECK(issue.message.find("123-45-6789") == std::string::npos);
}

TEST_CASE("excerpt masking") {
  CHECK(pii::mask_excerpt("123-45-6789") == "1***9");
  CHECK(pii::mask_excerpt("ab") == "***");
  CHECK(pii::mask_excerpt("\xC3\xA9tude") == "\xC3\xA9***e");
}

TEST_CASE("prefilters never change findings") {
  const auto dets = pii::builtin_detectors();
  std::mt19937_64 rng(11);
  const std::string alphabet = "0123456789-@. ()abcXYZ_+/#,";
  const std::vector<std::string> seeds = {"123-45-6789", "a@b.co",       "(555) 123-4567", "94305-1234",
                                          "10 Main St",  "555.123.4567", "x@y",            "Apt 4"};
  for (int round = 0; round < 300; ++round) {
    std::vector<std::vector<std::string>> rows(8);
    for (auto& row : rows) {
      for (int c = 0; c < 3; ++c) {
        std::string cell;
        const auto len = rng() % 24;
        for (std::size_t i = 0; i < len; ++i) cell += alphabet[rng() % alphabet.size()];
        if (rng() % 4 == 0) cell.insert(rng() % (cell.size() + 1), seeds[rng() % seeds.size()]);
        row.push_back(cell);
      }
    }
    auto t = Table::from_rows({"a", "b", "c"}, rows);
    REQUIRE(pii::scan_table(t, dets, {false}) == pii::scan_table(t, dets, {true}));
  }
}
