#include <doctest.h>

#include "topspec/campaign.hpp"
#include "topspec/error.hpp"

using namespace topspec;

TEST_CASE("campaign names") {
  for (auto c : all_campaigns()) CHECK(campaign_from_string(to_string(c)) == c);
  CHECK(all_campaigns().size() == 8);
  CHECK_THROWS_AS(campaign_from_string("nope"), PreconditionError);
  CHECK_FALSE(deterministic(Campaign::martingale));
  CHECK(deterministic(Campaign::decay));
}

TEST_CASE("every campaign runs clean on a small budget") {
  for (auto c : all_campaigns()) {
    CampaignOptions o;
    o.instances = c == Campaign::martingale ? 4 : 40;
    o.martingale_paths = 20000;
    o.seed = 5;
    const auto r = run_campaign(c, o);
    INFO(to_string(c));
    CHECK(r.reports.size() >= o.instances);
    CHECK(r.falsified == 0);
    CHECK(r.fail == 0);
    CHECK(r.pass > 0);
    CHECK(r.pass + r.fail + r.inapplicable + r.indeterminate == r.reports.size());
    const auto s = r.summary();
    CHECK(s["campaign"] == to_string(c));
  }
}

TEST_CASE("campaigns are deterministic across thread counts") {
  for (auto c : {Campaign::truncation, Campaign::gap, Campaign::decay}) {
    CampaignOptions o;
    o.instances = 24;
    o.seed = 77;
    o.threads = 1;
    const auto a = run_campaign(c, o);
    o.threads = 4;
    const auto b = run_campaign(c, o);
    REQUIRE(a.reports.size() == b.reports.size());
    for (std::size_t i = 0; i < a.reports.size(); ++i) CHECK(to_json(a.reports[i]).dump() == to_json(b.reports[i]).dump());
  }
}

TEST_CASE("an instance is replayable from its seed and index") {
  CampaignOptions o;
  o.instances = 10;
  o.seed = 9;
  const auto all = run_campaign(Campaign::l2, o);
  const auto one = campaign_instance(Campaign::l2, 9, 6, o);
  CHECK(to_json(one).dump() == to_json(all.reports[6]).dump());
  CHECK(one.instance["index"] == 6);
  CHECK(one.instance["campaign_seed"] == 9);
}

TEST_CASE("fault injection yields witnesses") {
  set_fault_injection(true);
  CampaignOptions o;
  o.instances = 5;
  const auto r = run_campaign(Campaign::truncation, o);
  set_fault_injection(false);
  CHECK(r.falsified > 0);
  bool witness = false;
  for (const auto& rep : r.reports) witness |= rep.instance.contains("witness");
  CHECK(witness);
}

TEST_CASE("fixed A and R reach the truncation checker") {
  CampaignOptions o;
  o.instances = 6;
  o.A = 1.0;
  o.R = 1;
  const auto r = run_campaign(Campaign::truncation, o);
  CHECK(r.inapplicable == r.reports.size());
}

TEST_CASE("planted_field") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{19}));
  const auto f = planted_field(D, -5.0, 1.0, {{Site{4}, 9.0}}, 3);
  CHECK(f.at(Site{4}) == 9.0);
  for (std::size_t i = 0; i < D->size(); ++i)
    if ((*D)[i] != Site{4}) CHECK(std::abs(f[i] + 5.0) <= 1.0);
  CHECK_THROWS_AS(planted_field(D, 0.0, 1.0, {{Site{40}, 1.0}}, 3), DomainError);
}

TEST_CASE("coupling ensemble") {
  const auto e = coupling_ensemble(TailSpec::exact(1.0), 600, 1, 50, 3, 0.5, 12, 4, 2);
  CHECK(e.reports.size() == 12);
  CHECK(e.fraction == doctest::Approx(double(e.holds) / 12.0));
  for (const auto& r : e.reports) CHECK(r.detail["eligible"].get<int>() >= 1);
}
