#include <doctest.h>

#include "catalog_trials.hpp"
#include "fairhub/catalog.hpp"

using namespace fairhub;
using namespace fairhub::catalog;

namespace {

StudyRecord rec(std::string acc, std::string title, std::string program, long long cohort,
                std::vector<std::string> domains = {}) {
  StudyRecord r;
  r.metadata.accession = std::move(acc);
  r.metadata.title = std::move(title);
  r.metadata.program = std::move(program);
  r.metadata.estimated_cohort_size = cohort;
  r.metadata.study_domains = std::move(domains);
  r.metadata.nih_institute = "NIMHD";
  r.has_data_files = true;
  return r;
}

Index three() {
  auto idx = build_index({
      rec("phs000003", "Wastewater surveillance in schools", "RADx-rad", 40, {"Wastewater Surveillance"}),
      rec("phs000001", "COVID-19 testing uptake among farmworkers", "RADx-UP", 650, {"Testing Rate/Uptake"}),
      rec("phs000002", "Vaccine hesitancy in rural communities", "RADx-UP", 1200,
          {"Vaccination Rate/Uptake", "Testing Rate/Uptake"}),
  });
  REQUIRE(idx);
  return *idx;
}

std::vector<std::string> accs(const SearchResult& r) {
  std::vector<std::string> out;
  for (const auto* p : r.page) out.push_back(p->metadata.accession);
  return out;
}

}  // namespace

TEST_CASE("tokenizer") {
  CHECK(tokenize("COVID-19 Testing, Rural") == std::vector<std::string>{"covid", "19", "testing", "rural"});
  CHECK(tokenize("  ").empty());
  CHECK(tokenize("caf\xC3\xA9 au lait") == std::vector<std::string>{"caf\xC3\xA9", "au", "lait"});
}

TEST_CASE("search on a small catalog") {
  const auto idx = three();
  auto q = make_query("test", {}, "title");
  REQUIRE(q);
  CHECK(accs(search(idx, *q)) == std::vector<std::string>{"phs000001", "phs000002"});

  q = make_query("", {{"program", "RADx-UP"}}, "cohort_size:desc");
  REQUIRE(q);
  CHECK(accs(search(idx, *q)) == std::vector<std::string>{"phs000002", "phs000001"});

  q = make_query("", {{"program", "RADx-UP"}, {"program", "RADx-rad"}, {"cohort_size", "0..700"}}, "accession");
  REQUIRE(q);
  CHECK(accs(search(idx, *q)) == std::vector<std::string>{"phs000001", "phs000003"});

  q = make_query("", {{"cohort_size", "1000-4999"}}, "title");
  REQUIRE(q);
  CHECK(accs(search(idx, *q)) == std::vector<std::string>{"phs000002"});

  q = make_query("vacc rural", {}, "title", 0, 1);
  REQUIRE(q);
  CHECK(search(idx, *q).total == 1);

  q = make_query("", {}, "title", 1, 1);
  REQUIRE(q);
  CHECK(accs(search(idx, *q)) == std::vector<std::string>{"phs000002"});

  CHECK_FALSE(make_query("", {{"colour", "x"}}));
  CHECK_FALSE(make_query("", {{"cohort_size", "lots"}}));
  CHECK_FALSE(make_query("", {{"has_data_files", "yes"}}));
  CHECK_FALSE(make_query("", {}, "shoe_size"));
  CHECK_FALSE(make_query("", {}, "title", 0, kMaxLimit + 1));
}

TEST_CASE("facets and stacked histograms") {
  const auto idx = three();
  auto h = facet_histogram(idx, FacetField::study_domains, FacetField::program);
  REQUIRE(h);
  REQUIRE(h->rows.size() == 3);
  CHECK(h->rows[0].value == "Testing Rate/Uptake");
  CHECK(h->rows[0].total == 2);
  CHECK(h->rows[0].stacks.at("RADx-UP") == 2);
  CHECK(h->stack_values == std::vector<std::string>{"RADx-UP", "RADx-rad"});
  CHECK(histogram_to_csv(*h).substr(0, 27) == "value,total,RADx-UP,RADx-ra");

  auto c = facet_histogram(idx, FacetField::cohort_size);
  REQUIRE(c);
  std::vector<std::string> order;
  for (const auto& r : c->rows) order.push_back(r.value);
  CHECK(order == std::vector<std::string>{"0-99", "500-999", "1000-4999"});

  CHECK_FALSE(facet_histogram(idx, FacetField::program, FacetField::study_domains));
}

TEST_CASE("autocomplete") {
  const auto idx = three();
  CHECK(autocomplete(idx, "Va", 5) == std::vector<std::string>{"vaccination", "vaccine"});
  CHECK(autocomplete(idx, "", 2).size() == 2);
  CHECK(autocomplete(idx, "zzz", 5).empty());
}

TEST_CASE("duplicate accessions are rejected") {
  auto idx = build_index({rec("phs000001", "a", "p", 1), rec("phs000001", "b", "p", 1)});
  CHECK_FALSE(idx);
}

TEST_CASE("records survive catalog.json") {
  const auto recs = trials::corpus(25, 3);
  auto back = parse_records(serialize_records(recs));
  REQUIRE(back);
  CHECK(*back == recs);
  CHECK_FALSE(parse_records("{"));
}

TEST_CASE("index agrees with a full scan") {
  for (std::size_t n : {10u, 60u}) {
    const auto out = trials::run(n, 150, n);
    CHECK(out.first_mismatch == "");
    CHECK(out.queries == 150);
  }
}
