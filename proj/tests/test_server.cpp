#include <doctest.h>
#include <httplib.h>

#include "fairhub/pipeline.hpp"
#include "fairhub/server.hpp"
#include "support.hpp"

using namespace fairhub;
namespace fs = std::filesystem;

namespace {

// One store holding both fixtures, built once.
class Fixture {
 public:
  Fixture() : tmp_("api") {
    auto cfg = pipeline::load_config(testing::write_config(tmp_.path(), tmp_.path() / "store"));
    if (!cfg) throw std::runtime_error("config");
    const auto key = testing::fixture_key();
    for (auto acc : {"phs002920", "phs000777"}) {
      auto out = pipeline::run_study_dir(testing::data_dir() / "fixtures" / acc, *cfg, &key);
      if (out.report.verdict != pipeline::Verdict::accepted) throw std::runtime_error(acc);
    }
    root_ = cfg->store_root;
  }
  const fs::path& root() const { return root_; }

 private:
  testing::TempDir tmp_;
  fs::path root_;
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

server::Response get(const server::ApiHandler& api, const std::string& path,
                     std::multimap<std::string, std::string> params = {}) {
  return api.handle({"GET", path, std::move(params)});
}

}  // namespace

TEST_CASE("api over the fixture store") {
  server::ApiHandler api(fixture().root());
  REQUIRE(api.reload().empty());

  auto health = get(api, "/health");
  CHECK(health.status == 200);
  CHECK(Json::parse(health.body)["studies"] == 2);

  auto list = Json::parse(get(api, "/studies", {{"filter", "program=RADx-UP"}}).body);
  REQUIRE(list["total"] == 1);
  CHECK(list["results"][0]["accession"] == "phs002920");
  CHECK(list["results"][0]["nih_institute"] == "NLM");

  auto text = Json::parse(get(api, "/studies", {{"text", "wastewater"}}).body);
  REQUIRE(text["total"] == 1);
  CHECK(text["results"][0]["accession"] == "phs000777");

  auto study = get(api, "/studies/phs002920");
  REQUIRE(study.status == 200);
  const auto s = Json::parse(study.body);
  CHECK(s["metadata"]["program"] == "RADx-UP");
  CHECK(s["access_tier"] == "controlled");
  CHECK(s["documents"] == Json::array({"README.txt"}));
  REQUIRE(s["files"].size() == 2);
  CHECK(s["files"][0]["kind"] == "original");
  CHECK(s["files"][1]["kind"] == "harmonized");
  CHECK(s["files"][0]["downloadable"] == false);

  auto yaml = get(api, "/studies/phs002920/metadata", {{"format", "yaml"}});
  CHECK(yaml.status == 200);
  CHECK(yaml.body.find("\"program\": \"RADx-UP\"") != std::string::npos);
}

TEST_CASE("api access control and errors") {
  server::ApiHandler api(fixture().root());
  REQUIRE(api.reload().empty());
  auto controlled = get(api, "/studies/phs002920/files/project60");
  CHECK(controlled.status == 403);
  CHECK(Json::parse(controlled.body)["error"] == "controlled_access");

  auto open = get(api, "/studies/phs000777/files/classroom", {{"kind", "harmonized"}});
  CHECK(open.status == 200);
  CHECK(open.body.rfind("participant_id,nih_age", 0) == 0);

  CHECK(get(api, "/studies/phs000777/files/nothing").status == 404);
  CHECK(get(api, "/studies/phs999999").status == 404);
  CHECK(get(api, "/studies/..").status == 404);
  CHECK(get(api, "/nowhere").status == 404);
  CHECK(get(api, "/studies", {{"bogus", "1"}}).status == 400);
  CHECK(get(api, "/studies", {{"limit", "-1"}}).status == 400);
  CHECK(get(api, "/facets", {{"field", "program"}, {"stack_by", "study_domains"}}).status == 400);
  CHECK(get(api, "/autocomplete", {{"prefix", "c"}, {"k", "0"}}).status == 400);
  CHECK(api.handle({"POST", "/studies", {}}).status == 405);
}

TEST_CASE("api facets and autocomplete") {
  server::ApiHandler api(fixture().root());
  REQUIRE(api.reload().empty());
  auto f = Json::parse(get(api, "/facets", {{"field", "program"}, {"stack_by", "access_tier_missing"}}).body);
  CHECK(f["error"] == "bad_request");
  auto h = Json::parse(get(api, "/facets", {{"field", "program"}, {"stack_by", "nih_institute"}}).body);
  REQUIRE(h["rows"].size() == 2);
  CHECK(h["rows"][0]["value"] == "RADx-UP");
  CHECK(h["rows"][0]["stacks"]["NLM"] == 1);
  auto csv = get(api, "/facets", {{"field", "cohort_size"}, {"format", "csv"}});
  CHECK(csv.content_type.rfind("text/csv", 0) == 0);
  CHECK(csv.body.rfind("value,total\n", 0) == 0);
  auto ac = Json::parse(get(api, "/autocomplete", {{"prefix", "Wast"}}).body);
  CHECK(ac["tokens"] == Json::array({"wastewater"}));
}

TEST_CASE("api over a real socket") {
  server::ApiHandler api(fixture().root());
  REQUIRE(api.reload().empty());
  server::HttpServer http(api);
  const int port = http.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  http.start();
  httplib::Client cli("127.0.0.1", port);
  auto res = cli.Get("/studies?filter=nih_institute=NLM&sort=title:desc");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(Json::parse(res->body)["results"][0]["program"] == "RADx-UP");
  auto denied = cli.Get("/studies/phs002920/files/project60");
  REQUIRE(denied);
  CHECK(denied->status == 403);
  auto post = cli.Post("/studies", "{}", "application/json");
  REQUIRE(post);
  CHECK(post->status == 405);
  http.stop();
}
