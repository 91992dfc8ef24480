#include <doctest.h>

#include "fairhub/pipeline.hpp"
#include "fairhub/synth.hpp"
#include "support.hpp"

using namespace fairhub;
namespace fs = std::filesystem;
using testing::data_dir;

namespace {

pipeline::PipelineConfig config_for(const fs::path& dir, const fs::path& store_root,
                                    const std::string& mode = "transform") {
  auto cfg = pipeline::load_config(testing::write_config(dir, store_root, mode));
  REQUIRE(cfg);
  return *cfg;
}

std::set<std::string> codes(const pipeline::StageReport* s) {
  std::set<std::string> out;
  if (s)
    for (const auto& i : s->issues) out.insert(i.code);
  return out;
}

}  // namespace

TEST_CASE("fixture study is accepted and stored") {
  testing::TempDir tmp("pipe");
  const auto cfg = config_for(tmp.path(), tmp.path() / "store");
  const auto key = testing::fixture_key();
  auto out = pipeline::run_study_dir(data_dir() / "fixtures/phs002920", cfg, &key);
  CHECK_FALSE(out.io_error);
  CHECK(out.report.verdict == pipeline::Verdict::accepted);
  CHECK(pipeline::exit_code(out) == 0);
  REQUIRE(out.report.persistent_id);
  CHECK(store::verify_study(cfg.store_root, "phs002920").empty());
  CHECK(out.report.harmonization.at("project60").mapped == 3);

  // stored originals are de-identified, harmonized copies carry the CDE
  const auto sdir = store::study_dir(cfg.store_root, "phs002920");
  const auto data = testing::slurp(sdir / "bundles/project60/data.csv");
  CHECK(data.find("[REDACTED]") != std::string::npos);
  CHECK(data.find("Clinic") == std::string::npos);
  const auto harm = testing::slurp(sdir / "harmonized/project60/data.csv");
  CHECK(harm.rfind("participant_id,nih_age,nih_zip3", 0) == 0);
  auto meta = parse_metadata(testing::slurp(sdir / "bundles/project60/meta.json"));
  REQUIRE(meta);
  CHECK((*meta)["deid_applied"] == true);

  auto cat = store::load_catalog(cfg.store_root);
  REQUIRE(cat);
  REQUIRE(cat->size() == 1);
  CHECK(cat->front().variables.count("nih_education"));
  CHECK(cat->front().variables.count("edu_years_of_school"));

  SUBCASE("resubmission at the same version is accepted") {
    auto again = pipeline::run_study_dir(data_dir() / "fixtures/phs002920", cfg, &key);
    CHECK(again.report.verdict == pipeline::Verdict::accepted);
  }
}

TEST_CASE("identical inputs give identical reports") {
  testing::TempDir a("det-a"), b("det-b");
  const auto key = testing::fixture_key();
  auto ra = pipeline::run_study_dir(data_dir() / "fixtures/phs002920", config_for(a.path(), a.path() / "s"), &key);
  auto rb = pipeline::run_study_dir(data_dir() / "fixtures/phs002920", config_for(b.path(), b.path() / "s"), &key);
  CHECK(pipeline::report_to_json(ra.report) == pipeline::report_to_json(rb.report));
  CHECK(ra.report.manifest_sha256 == rb.report.manifest_sha256);
  CHECK(pipeline::report_to_json(ra.report).find("shift_offsets") == std::string::npos);
}

TEST_CASE("an SSN in free text sends the study back") {
  testing::TempDir tmp("ssn");
  synth::SynthSpec spec;
  spec.rows = 30;
  spec.inject.ssn = 1;
  const auto corpus = synth::generate(spec);
  synth::write_corpus(corpus, tmp.path() / "in");
  const synth::LedgerEntry* planted = nullptr;
  for (const auto& e : corpus.ledger)
    if (e.code == "PII_SSN") planted = &e;
  REQUIRE(planted);

  const auto key = testing::fixture_key();
  const auto cfg = config_for(tmp.path(), tmp.path() / "store");
  auto out = pipeline::run_study_dir(tmp.path() / "in" / planted->study, cfg, &key);
  CHECK(out.report.verdict == pipeline::Verdict::returned_to_contributor);
  CHECK(pipeline::exit_code(out) == 1);
  const auto* rescan = out.report.stage("rescan");
  REQUIRE(rescan);
  CHECK(rescan->status == pipeline::StageStatus::failed);
  REQUIRE(rescan->issues.size() == 1);
  CHECK(rescan->issues[0].code == "PII_SSN");
  CHECK(rescan->issues[0].location.row == planted->row);
  CHECK(rescan->issues[0].location.column == planted->column);
  CHECK(rescan->issues[0].location.file == planted->file);
  CHECK(out.report.stage("store")->status == pipeline::StageStatus::skipped);
  CHECK_FALSE(fs::exists(tmp.path() / "store" / "studies" / planted->study));

  SUBCASE("verify-only mode gates at the first scan") {
    testing::TempDir v("verify");
    auto vo = pipeline::run_study_dir(tmp.path() / "in" / planted->study,
                                      config_for(v.path(), v.path() / "store", "verify-only"), nullptr);
    CHECK(vo.report.verdict == pipeline::Verdict::returned_to_contributor);
    CHECK(vo.report.stage("scan")->status == pipeline::StageStatus::failed);
    CHECK(codes(vo.report.stage("scan")).count("PII_SSN"));
  }
}

TEST_CASE("ingest problems come back as a returned report") {
  testing::TempDir tmp("ingest");
  const auto key = testing::fixture_key();
  const auto cfg = config_for(tmp.path(), tmp.path() / "store");
  fs::create_directories(tmp.path() / "study/bundles/x");
  fs::copy_file(data_dir() / "fixtures/phs002920/study.json", tmp.path() / "study/study.json");
  store::write_file_atomic(tmp.path() / "study/bundles/x/data.csv", "a\n1\n");
  store::write_file_atomic(tmp.path() / "study/stray.bin", "?");
  auto out = pipeline::run_study_dir(tmp.path() / "study", cfg, &key);
  CHECK(out.report.verdict == pipeline::Verdict::returned_to_contributor);
  const auto c = codes(out.report.stage("ingest"));
  CHECK(c.count("ING_MISSING_COMPONENT"));
  CHECK(c.count("ING_EXTRA_FILE"));
}

TEST_CASE("config errors") {
  testing::TempDir tmp("cfg");
  store::write_file_atomic(tmp.path() / "bad.json", "{\"store_root\": 3}");
  CHECK_FALSE(pipeline::load_config(tmp.path() / "bad.json"));
  CHECK_FALSE(pipeline::load_config(tmp.path() / "absent.json"));
  auto shipped = pipeline::load_config(data_dir() / "pipeline.json");
  REQUIRE(shipped);
  CHECK(shipped->codebook.categories.size() == 12);
}

TEST_CASE("mapping selection order") {
  std::vector<harmonize::MappingSet> sets(4);
  sets[0].study = "*";
  sets[1].study = "*";
  sets[1].file = "survey";
  sets[2].study = "phs000001";
  sets[3].study = "phs000001";
  sets[3].file = "survey";
  CHECK(pipeline::select_mapping(sets, "phs000001", "survey") == &sets[3]);
  CHECK(pipeline::select_mapping(sets, "phs000001", "other") == &sets[2]);
  CHECK(pipeline::select_mapping(sets, "phs000002", "survey") == &sets[1]);
  CHECK(pipeline::select_mapping(sets, "phs000002", "other") == &sets[0]);
  CHECK(pipeline::select_mapping({}, "a", "b") == nullptr);
}
