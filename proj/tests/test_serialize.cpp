#include <doctest.h>

#include "topspec/serialize.hpp"

using namespace topspec;

TEST_CASE("domain round trip") {
  const LatticeDomain D(2, {Site{1, 2}, Site{0, 5}, Site{-3, 4}});
  const auto j = to_json(D);
  CHECK(j["d"] == 2);
  CHECK(j["sites"][0] == nlohmann::json::array({-3, 4}));
  CHECK(domain_from_json(j) == D);
  CHECK(domain_from_json(nlohmann::json::parse(j.dump())) == D);
}

TEST_CASE("site round trip") {
  const Site s{7, -1, 3};
  CHECK(site_from_json(site_to_json(s)) == s);
}

TEST_CASE("tail and field round trip") {
  for (const auto& spec : {TailSpec::exact(1.5), TailSpec::perturbed(1.0, TailSpec::Kind::log_sq, 0.3)})
    CHECK(tail_from_json(to_json(spec)) == spec);
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0, 0}, Site{3, 4}));
  const auto f = sample(D, TailSpec::perturbed(2.0, TailSpec::Kind::log_abs, 0.1), 123456789012345ULL);
  const auto j = to_json(f);
  CHECK(j["seed"] == 123456789012345ULL);
  CHECK(j["values"].size() == D->size());
  const auto g = field_from_json(nlohmann::json::parse(j.dump()));
  CHECK(g.domain() == f.domain());
  CHECK(g.spec() == f.spec());
  CHECK(g.seed() == f.seed());
  for (std::size_t i = 0; i < D->size(); ++i) CHECK(g[i] == f[i]);
}

TEST_CASE("spectral result json") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{9}));
  const auto r = top_eigs(assemble(sample(D, TailSpec::exact(1.0), 1)), 2);
  const auto j = to_json(r);
  CHECK(j["eigenvalues"].size() == 2);
  CHECK(j["centers"].size() == 2);
  CHECK(j["residuals"].size() == 2);
  CHECK_FALSE(j.contains("eigenvectors"));
  const auto jv = to_json(r, true);
  CHECK(jv["eigenvectors"].size() == 2);
  CHECK(jv["eigenvectors"][0].size() == 10);
}

TEST_CASE("region decomposition and distances json") {
  auto D = std::make_shared<const LatticeDomain>(LatticeDomain(1, {Site{0}, Site{1}, Site{2}, Site{10}}));
  const PotentialField f(D, {5.0, -5.0, -5.0, -5.0}, TailSpec::exact(1.0), 0);
  const auto dec = extract(f, 1, 1.0, principal_eigenvalue(assemble(f)));
  const auto j = to_json(dec);
  CHECK(j["components"].size() == 1);
  CHECK(j["components"][0]["sites"] == nlohmann::json::array({{0}, {1}}));
  CHECK(j["components"][0]["trimmed"] == false);
  const auto jd = to_json(contracted_distance(dec));
  CHECK(jd["distances"][0] == nlohmann::json::array({0, 0, 1, nullptr}));
}

TEST_CASE("chi solution json") {
  const auto s = solve_chi(std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{2})), 1.0);
  const auto j = to_json(s);
  CHECK(j["chi"].get<double>() == s.chi);
  CHECK(j["optimizer"].size() == 3);
  CHECK(j["support"].size() == 3);
  CHECK(j["trace"].size() == s.trace.size());
  CHECK(j["runs"].size() == s.runs.size());
}
