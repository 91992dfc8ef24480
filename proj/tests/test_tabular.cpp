#include <doctest.h>

#include <chrono>
#include <random>
#include <regex>
#include <set>
#include <tuple>

#include "fairhub/csv.hpp"
#include "fairhub/dictionary.hpp"
#include "fairhub/tabledata.hpp"
#include "fairhub/values.hpp"

using namespace fairhub;

TEST_CASE("csv quoting, CRLF and BOM") {
  auto r = csv::parse("\xEF\xBB\xBF" "a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\r\n\"multi\nline\",\n");
  REQUIRE(r);
  REQUIRE(r->size() == 3);
  CHECK(r->record(1)[0] == "x, y");
  CHECK(r->record(1)[1] == "say \"hi\"");
  CHECK(r->record(2)[0] == "multi\nline");
  CHECK(r->record(2)[1] == "");

  CHECK_FALSE(csv::parse("a,\"b\n"));
  CHECK_FALSE(csv::parse("a,b\"c\n"));
  CHECK_FALSE(csv::parse("a\xff\n"));

  std::string out;
  const std::vector<std::string> row = {"plain", "com,ma", "q\"uote", ""};
  csv::append_row(out, row);
  CHECK(out == "plain,\"com,ma\",\"q\"\"uote\",\n");
}

TEST_CASE("value grammar") {
  CHECK(values::parse_integer("-12") == -12);
  CHECK_FALSE(values::parse_integer("1.0"));
  CHECK_FALSE(values::parse_integer("99999999999999999999"));
  CHECK(values::parse_decimal(".5") == 0.5);
  CHECK(values::parse_decimal("3.") == 3.0);
  CHECK_FALSE(values::parse_decimal("1e3"));
  CHECK_FALSE(values::parse_decimal("1,5"));
  CHECK(values::parse_date("2024-02-29"));
  CHECK_FALSE(values::parse_date("2023-02-29"));
  CHECK_FALSE(values::parse_date("2023-2-01"));
  CHECK(values::parse_datetime("2021-01-01T23:59:59"));
  CHECK_FALSE(values::parse_datetime("2021-01-01T24:00:00"));
  CHECK(values::parse_boolean("TRUE") == true);
  CHECK(values::parse_boolean("0") == false);
  CHECK_FALSE(values::parse_boolean("yes"));
  CHECK(values::format_number(0.1) == "0.1");
  CHECK(values::format_number(42) == "42");
}

TEST_CASE("dictionary parse and errors") {
  const std::string good =
      "Id,Label,Datatype,Units,Enumeration,Required,Pattern,Min,Max\n"
      "edu,Education,enum,,\"1=\"\"Some\"\"; 2=\"\"More, \"\"\"\"x\"\"\"\"\"\"\",true,,,\n"
      "age,Age,integer,years,,false,,0,120\n";
  auto d = parse_dictionary(good, "dict.csv");
  REQUIRE(d);
  REQUIRE(d->variables.size() == 2);
  REQUIRE(d->variables[0].enumeration.size() == 2);
  CHECK(d->variables[0].enumeration[1].label == "More, \"x\"");
  CHECK(d->variables[1].units == "years");
  CHECK(parse_dictionary(serialize_dictionary(*d), "dict.csv").value == d.value);

  auto bad = parse_dictionary(
      "Id,Label,Datatype,Units,Enumeration,Required,Pattern,Min,Max\n"
      "1bad,x,integer,,,false,,,\n"
      "a,x,float,,,false,,,\n"
      "a,x,enum,,,false,,,\n"
      "b,x,integer,,,maybe,,5,1\n"
      "c,x,string,,,false,([,,\n",
      "dict.csv");
  CHECK_FALSE(bad);
  std::set<std::string> codes;
  for (const auto& i : bad.issues) codes.insert(i.code);
  for (auto c : {"DICT_BAD_ID", "DICT_BAD_DATATYPE", "DICT_DUP_ID", "DICT_ENUM_REQUIRED", "DICT_BAD_REQUIRED",
                 "DICT_BAD_BOUNDS", "DICT_BAD_PATTERN"})
    CHECK_MESSAGE(codes.count(c), c);
  CHECK_FALSE(parse_dictionary("Id,Label\nx,y\n"));
}

// ---------------------------------------------------------------------------
// Conformance against a brute-force checker

namespace {

using Key = std::tuple<std::size_t, std::string, std::string>;  // row, column, code

bool oracle_date(const std::string& s) {
  static const std::regex re(R"(\d{4}-\d{2}-\d{2})");
  if (!std::regex_match(s, re)) return false;
  std::chrono::year_month_day d{std::chrono::year{std::stoi(s.substr(0, 4))},
                                std::chrono::month{static_cast<unsigned>(std::stoi(s.substr(5, 2)))},
                                std::chrono::day{static_cast<unsigned>(std::stoi(s.substr(8, 2)))}};
  return d.ok();
}

std::set<Key> oracle(const std::vector<std::vector<std::string>>& rows, const std::vector<VariableSpec>& vars) {
  static const std::regex int_re(R"([+-]?[0-9]+)");
  static const std::regex dec_re(R"([+-]?([0-9]+(\.[0-9]*)?|\.[0-9]+))");
  std::set<Key> out;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < vars.size(); ++c) {
      const auto& v = vars[c];
      const auto& cell = rows[r][c];
      const std::size_t fr = r + 2;
      if (cell.empty()) {
        if (v.required) out.insert({fr, v.id, "DATA_REQUIRED_MISSING"});
        continue;
      }
      bool ok = true;
      std::optional<double> num;
      switch (v.datatype) {
        case Datatype::integer:
          ok = std::regex_match(cell, int_re);
          if (ok) num = std::stod(cell);
          break;
        case Datatype::decimal:
          ok = std::regex_match(cell, dec_re);
          if (ok) num = std::stod(cell);
          break;
        case Datatype::boolean: {
          std::string l = cell;
          for (auto& ch : l) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
          ok = l == "true" || l == "false" || l == "0" || l == "1";
          break;
        }
        case Datatype::date: ok = oracle_date(cell); break;
        case Datatype::enumeration: {
          ok = false;
          for (const auto& e : v.enumeration) ok |= e.code == cell;
          if (!ok) out.insert({fr, v.id, "DATA_ENUM_VIOLATION"});
          continue;
        }
        default: break;
      }
      if (!ok) {
        out.insert({fr, v.id, "DATA_TYPE_MISMATCH"});
        continue;
      }
      if (num && ((v.min && *num < *v.min) || (v.max && *num > *v.max)))
        out.insert({fr, v.id, "DATA_OUT_OF_BOUNDS"});
      if (v.pattern && !std::regex_match(cell, std::regex(*v.pattern)))
        out.insert({fr, v.id, "DATA_PATTERN_MISMATCH"});
    }
  }
  return out;
}

}  // namespace

TEST_CASE("conformance matches a brute-force checker") {
  std::mt19937_64 rng(7);
  const std::vector<std::string> pool = {"",   "0",     "1",          "-3",         "12",          "250",
                                         "1.5", ".5",   "1e3",        "abc",        "2021-02-28",  "2021-02-30",
                                         "TRUE", "false", "yes",      "3",          "P123456",     "P12",
                                         " 4",  "+7",   "2020-12-31", "99.999",     "-0.25",       "4"};
  for (int round = 0; round < 200; ++round) {
    std::vector<VariableSpec> vars;
    const std::size_t ncol = 1 + rng() % 6;
    for (std::size_t c = 0; c < ncol; ++c) {
      VariableSpec v;
      v.id = "v" + std::to_string(c);
      v.label = v.id;
      v.datatype = static_cast<Datatype>(rng() % 7);
      if (v.datatype == Datatype::datetime) v.datatype = Datatype::string;
      if (v.datatype == Datatype::enumeration) v.enumeration = {{"1", "one"}, {"2", "two"}, {"4", "four"}};
      v.required = rng() % 2;
      if (is_numeric(v.datatype) && rng() % 2) {
        v.min = -1;
        v.max = 100;
      }
      if (v.datatype == Datatype::string && rng() % 3 == 0) v.pattern = "P[0-9]{6}";
      vars.push_back(v);
    }
    std::vector<std::string> header;
    for (const auto& v : vars) header.push_back(v.id);
    std::vector<std::vector<std::string>> rows(1 + rng() % 20);
    for (auto& row : rows)
      for (std::size_t c = 0; c < ncol; ++c) row.push_back(pool[rng() % pool.size()]);
    DataDictionary d{vars, "dict.csv"};
    REQUIRE(validate_dictionary(d).empty());
    const auto issues = validate_against_dictionary(Table::from_rows(header, rows), d, {"data.csv", {}});
    std::set<Key> got;
    for (const auto& i : issues) {
      CHECK(i.location.file == "data.csv");
      got.insert({i.location.row, i.location.column, i.code});
    }
    REQUIRE(got == oracle(rows, vars));
  }
}

TEST_CASE("column-level conformance and sentinels") {
  auto d = parse_dictionary(
      "Id,Label,Datatype,Units,Enumeration,Required,Pattern,Min,Max\n"
      "a,A,integer,,,true,,,\n"
      "b,B,integer,,,false,,,\n");
  REQUIRE(d);
  auto t = Table::from_rows({"a", "z"}, {{"-999", "1"}});
  auto issues = validate_against_dictionary(t, *d, {"f.csv", MissingPolicy{{"-999"}}});
  std::set<std::string> codes;
  for (const auto& i : issues) codes.insert(i.code);
  CHECK(codes == std::set<std::string>{"DATA_REQUIRED_MISSING", "DATA_UNDECLARED_VARIABLE", "DATA_MISSING_VARIABLE"});
}

TEST_CASE("table parsing and summary") {
  auto t = parse_table("x,y\n1,a\n,b\n3,c\n", "t.csv");
  REQUIRE(t);
  CHECK(t->n_rows() == 3);
  CHECK(serialize_table(*t) == "x,y\n1,a\n,b\n3,c\n");
  CHECK_FALSE(parse_table("x,x\n1,2\n"));
  CHECK_FALSE(parse_table("x,y\n1\n"));
  CHECK_FALSE(parse_table(""));

  auto d = parse_dictionary(
      "Id,Label,Datatype,Units,Enumeration,Required,Pattern,Min,Max\n"
      "x,X,integer,,,false,,,\n"
      "y,Y,string,,,false,,,\n");
  REQUIRE(d);
  const auto s = summarize(*t, *d);
  CHECK(s.n_records == 3);
  CHECK(s.n_variables == 2);
  CHECK(s.variables[0].missing == 1);
  CHECK(s.variables[0].min == 1.0);
  CHECK(s.variables[0].max == 3.0);
  CHECK(s.variables[0].mean == 2.0);
  CHECK_FALSE(s.variables[1].mean);
}
