#include <doctest.h>

#include "fairhub/synth.hpp"
#include "support.hpp"

using namespace fairhub;

TEST_CASE("synth spec parsing") {
  auto s = synth::parse_spec(testing::slurp(testing::data_dir() / "synth.json"));
  REQUIRE(s);
  CHECK(s->n_studies == 3);
  CHECK(s->inject.enumeration == 1);
  auto back = synth::parse_spec(synth::spec_to_json(*s).dump());
  REQUIRE(back);
  CHECK(synth::spec_to_json(*back) == synth::spec_to_json(*s));
  CHECK_FALSE(synth::parse_spec(R"({"variables": 3})"));
  CHECK_FALSE(synth::parse_spec(R"({"rows": 2, "inject": {"ssn": 5}})"));
  CHECK_FALSE(synth::parse_spec(R"({"inject": {"metadata": 4}})"));
  CHECK_FALSE(synth::parse_spec(R"({"seed": "x"})"));
}

TEST_CASE("generation is deterministic and seed dependent") {
  synth::SynthSpec spec;
  spec.n_studies = 2;
  spec.rows = 40;
  spec.inject.type = 2;
  spec.inject.metadata = 3;
  const auto a = synth::generate(spec);
  const auto b = synth::generate(spec);
  CHECK(a.files == b.files);
  CHECK(a.ledger == b.ledger);
  spec.seed = 43;
  CHECK(synth::generate(spec).files != a.files);
}

TEST_CASE("ledger counts follow the injection plan") {
  synth::SynthSpec spec;
  spec.n_studies = 2;
  spec.bundles_per_study = 2;
  spec.rows = 50;
  spec.variables = 20;
  spec.inject = {1, 1, 1, 2, 1, 1, 1, 3};
  const auto c = synth::generate(spec);
  std::map<std::string, std::size_t> per_code;
  for (const auto& e : c.ledger) ++per_code[e.code];
  CHECK(per_code["PII_COLUMN_NAME"] == 4);
  CHECK(per_code["PII_SSN"] == 4);
  CHECK(per_code["PII_EMAIL"] == 4);
  CHECK(per_code["PII_PHONE"] == 4);
  CHECK(per_code["DATA_TYPE_MISMATCH"] == 8);
  CHECK(per_code["DATA_ENUM_VIOLATION"] == 4);
  CHECK(per_code["DATA_OUT_OF_BOUNDS"] == 4);
  CHECK(per_code["DATA_REQUIRED_MISSING"] == 4);
  CHECK(per_code["META_BAD_VALUE"] == 4);
  CHECK(per_code["META_UNRESOLVED_TERM"] == 4);
  CHECK(per_code["META_MISSING_REQUIRED"] == 4);
  CHECK(std::is_sorted(c.ledger.begin(), c.ledger.end()));
  CHECK(c.files.count("phs900001/bundles/survey_2/data.csv"));
  CHECK(c.files.count("ledger.json"));
}

TEST_CASE("written corpus matches the in-memory one") {
  testing::TempDir tmp("synth");
  synth::SynthSpec spec;
  const auto c = synth::generate(spec);
  synth::write_corpus(c, tmp.path());
  for (const auto& [rel, bytes] : c.files) CHECK(testing::slurp(tmp.path() / rel) == bytes);
}
