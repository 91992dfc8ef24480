#include <doctest.h>

#include <set>

#include "fairhub/harmonize.hpp"
#include "support.hpp"

using namespace fairhub;
using namespace fairhub::harmonize;

namespace {

Codebook shipped_codebook() {
  auto cb = parse_codebook(testing::slurp(testing::data_dir() / "codebook.json"), "codebook.json");
  REQUIRE(cb);
  return *cb;
}

MappingSet shipped_mappings() {
  auto m = parse_mapping_set(testing::slurp(testing::data_dir() / "mappings/sample.json"), "sample.json");
  REQUIRE(m);
  return *m;
}

DataDictionary edu_dictionary() {
  auto d = parse_dictionary(
      "Id,Label,Datatype,Units,Enumeration,Required,Pattern,Min,Max\n"
      "participant_id,Participant,string,,,true,,,\n"
      "edu_years_of_school,Years of school,enum,,\"1=\"\"a\"\"; 2=\"\"b\"\"; 3=\"\"c\"\"; 4=\"\"d\"\"; "
      "5=\"\"e\"\"; 6=\"\"f\"\"; 7=\"\"g\"\"; 8=\"\"h\"\"\",false,,,\n",
      "dict.csv");
  REQUIRE(d);
  return *d;
}

}  // namespace

TEST_CASE("shipped codebook") {
  const auto cb = shipped_codebook();
  CHECK(cb.categories.size() == 12);
  const auto* edu = cb.find("nih_education");
  REQUIRE(edu);
  CHECK(edu->category == "Education");
  REQUIRE(edu->categorical());
  bool found = false;
  for (const auto& e : edu->enumeration) found |= e.code == "2" && e.label == "High school graduate or GED completed";
  CHECK(found);
}

TEST_CASE("education years map onto the CDE") {
  const auto cb = shipped_codebook();
  const auto m = shipped_mappings();
  const auto d = edu_dictionary();
  auto t = Table::from_rows({"participant_id", "edu_years_of_school"}, {{"P1", "4"}, {"P2", "8"}, {"P3", ""}});
  auto r = apply_mappings(t, d, cb, m, {Strictness::strict, {}, "data.csv"});
  REQUIRE(r);
  REQUIRE(r->table.header() == std::vector<std::string>{"participant_id", "nih_education"});
  CHECK(r->table.cell(0, 1) == "2");
  CHECK(r->table.cell(1, 1) == "6");
  CHECK(r->table.cell(2, 1) == "");
  CHECK(r->dictionary.find("nih_education")->find_code("2")->label == "High school graduate or GED completed");
  CHECK(r->report.mapped == 1);
  CHECK(r->report.values_remapped == 2);
}

TEST_CASE("runtime values outside the value map") {
  const auto cb = shipped_codebook();
  MappingSet m;
  m.study = "*";
  m.mappings.push_back({"edu_years_of_school", "nih_education", {{"1", "1"}, {"2", "2"}}, MappingAction::map});
  auto d = edu_dictionary();
  // validation catches codes the map does not cover
  auto issues = validate_mappings(d, cb, m);
  std::set<std::string> codes;
  for (const auto& i : issues) codes.insert(i.code);
  CHECK(codes.count("MAP_UNCOVERED_VALUE"));

  auto t = Table::from_rows({"participant_id", "edu_years_of_school"}, {{"P1", "1"}, {"P2", "3"}});
  auto strict = apply_mappings(t, d, cb, m, {Strictness::strict, {}, "data.csv"});
  CHECK_FALSE(strict);
  REQUIRE(!strict.issues.empty());
  CHECK(strict.issues[0].code == "MAP_RUNTIME_UNCOVERED");
  CHECK(strict.issues[0].location.row == 3);
  auto lenient = apply_mappings(t, d, cb, m, {Strictness::lenient, {}, "data.csv"});
  REQUIRE(lenient);
  CHECK(lenient->table.cell(1, 1) == "");
  CHECK(lenient->report.unmapped_value_incidents == 1);
}

TEST_CASE("mapping validation errors") {
  const auto cb = shipped_codebook();
  const auto d = edu_dictionary();
  MappingSet m;
  m.study = "*";
  m.mappings.push_back({"nope", "nih_education", {}, MappingAction::map});
  m.mappings.push_back({"participant_id", "not_a_cde", {}, MappingAction::map});
  std::set<std::string> codes;
  for (const auto& i : validate_mappings(d, cb, m)) codes.insert(i.code);
  CHECK(codes.count("MAP_UNKNOWN_SOURCE"));
  CHECK(codes.count("MAP_UNKNOWN_CDE"));

  CHECK_FALSE(parse_mapping_set(R"({"study": "*", "mappings": [{"source": "a", "action": "explode"}]})"));
  CHECK_FALSE(parse_mapping_set(R"({"study": "*", "mappings": [{"source": "a", "action": "map"}]})"));
}

TEST_CASE("mapping csv import and serialization") {
  auto m = import_mapping_csv(
      "source,target,action,source_code,target_code\n"
      "edu_years_of_school,nih_education,map,1,1\n"
      "edu_years_of_school,nih_education,map,4,2\n"
      "notes,,drop,,\n",
      "phs000001");
  REQUIRE(m);
  REQUIRE(m->mappings.size() == 2);
  const auto* edu = m->find_source("edu_years_of_school");
  REQUIRE(edu);
  CHECK(edu->value_map.at("4") == "2");
  auto back = parse_mapping_set(serialize_mapping_set(*m));
  REQUIRE(back);
  CHECK(serialize_mapping_set(*back) == serialize_mapping_set(*m));
}

TEST_CASE("both versions keep the original intact") {
  const auto cb = shipped_codebook();
  MappingSet m;
  m.study = "*";
  m.mappings.push_back({"edu_years_of_school", "nih_education",
                        {{"1", "1"}, {"2", "1"}, {"3", "1"}, {"4", "2"}, {"5", "3"}, {"6", "4"}, {"7", "5"}, {"8", "6"}},
                        MappingAction::map});
  FileBundle b;
  b.dictionary = edu_dictionary();
  b.table = Table::from_rows({"participant_id", "edu_years_of_school"}, {{"P1", "4"}});
  b.file_metadata.study = "phs000001";
  b.file_metadata.file_name = "survey.csv";
  const FileBundle copy = b;
  auto r = both_versions(b, cb, m, {Strictness::strict, {}, "survey/data.csv"});
  REQUIRE(r);
  CHECK(b == copy);
  CHECK(r->original == copy);
  CHECK(r->harmonized.file_metadata.harmonized);
  CHECK(r->harmonized.file_metadata.file_name == "survey_harmonized.csv");
  CHECK(r->harmonized.file_metadata.summary.n_records == 1);
  CHECK(harmonized_file_name("data.csv") == "data_harmonized.csv");
}
