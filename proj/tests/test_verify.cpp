#include <doctest.h>

#include <cmath>

#include "topspec/bounds.hpp"
#include "topspec/evt.hpp"
#include "topspec/verify.hpp"

using namespace topspec;

namespace {

std::shared_ptr<const LatticeDomain> path(int n) {
  return std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{n - 1}));
}

PotentialField planted(std::shared_ptr<const LatticeDomain> D, double background,
                       std::initializer_list<std::pair<Site, double>> ps) {
  std::vector<double> v(D->size(), background);
  for (const auto& [s, h] : ps) v[*D->index_of(s)] = h;
  return PotentialField(D, v, TailSpec::exact(1.0), 0);
}

struct FaultGuard {
  FaultGuard() { set_fault_injection(true); }
  ~FaultGuard() { set_fault_injection(false); }
};

}  // namespace

TEST_CASE("truncation with U = D") {
  const auto f = sample(path(40), TailSpec::exact(1.0), 1);
  const auto r = check_truncation(f, 3, 4.0, f.domain());
  CHECK(r.status == CheckStatus::pass);
  CHECK(r.lhs == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.rhs == doctest::Approx(epsilon_R(1, 4.0, 3)));
  CHECK(r.margin() == doctest::Approx(r.rhs - r.lhs));
}

TEST_CASE("truncation on a planted peak with U = D_{R,A}") {
  const auto f = planted(path(60), -6.0, {{Site{30}, 10.0}});
  const double l1 = principal_eigenvalue(assemble(f));
  const auto U = large_field_region(f, 3, 4.0, l1);
  const auto r = check_truncation(f, 3, 4.0, U);
  CHECK(r.status == CheckStatus::pass);
  CHECK(r.lhs <= r.rhs);
}

TEST_CASE("truncation preconditions") {
  const auto f = planted(path(30), -6.0, {{Site{10}, 8.0}});
  CHECK(check_truncation(f, 1, 1.0, f.domain()).status == CheckStatus::inapplicable);
  CHECK(check_truncation(f, 3, 4.0, lattice_box(Site{0}, Site{5})).status == CheckStatus::inapplicable);
  CHECK(check_truncation(f, 3, 4.0, lattice_box(Site{0}, Site{40})).status == CheckStatus::inapplicable);
}

TEST_CASE("truncation on random fields") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const bool two = seed % 2 == 0;
    auto D = std::make_shared<const LatticeDomain>(two ? lattice_box(Site{0, 0}, Site{12, 12}) : lattice_box(Site{0}, Site{150}));
    const auto f = sample(D, TailSpec::exact(1.0), seed);
    const double A = 3.0 + double(seed % 4);
    const int d = two ? 2 : 1;
    int R = 1;
    while (epsilon_R(d, A, R) > A / 2) ++R;
    const auto U = large_field_region(f, R, A, principal_eigenvalue(assemble(f)));
    const auto r = check_truncation(f, R, A, U);
    CHECK(r.status == CheckStatus::pass);
  }
}

TEST_CASE("l2 bound examples") {
  const auto f = planted(path(80), -6.0, {{Site{40}, 12.0}});
  const auto top = top_eigs(assemble(f), 1);
  const auto psi = top.vector(0);
  const double lambda = top.eigenvalues[0];
  const auto empty = check_l2_bound(f, psi, lambda, 4.0, 4.0, 3, LatticeDomain(1));
  CHECK(empty.status == CheckStatus::pass);
  CHECK(empty.lhs == 0.0);

  std::vector<Site> far;
  for (const auto& s : f.domain())
    if (std::abs(s[0] - 40) > 6) far.push_back(s);
  const LatticeDomain Dp(1, far);
  double prev_rhs = 2.0;
  for (int R = 1; R <= 6; ++R) {
    const auto r = check_l2_bound(f, psi, lambda, 4.0, 4.0, R, Dp);
    CHECK(r.status == CheckStatus::pass);
    CHECK(r.lhs <= r.rhs);
    CHECK(r.rhs < prev_rhs);
    CHECK(r.rhs == doctest::Approx(std::pow(3.0, 2.0 - 2.0 * R) / 9.0).epsilon(1e-12));
    prev_rhs = r.rhs;
  }
  CHECK(check_l2_bound(f, psi, lambda, 4.0, 4.0, 10, Dp).status == CheckStatus::inapplicable);
  CHECK(check_l2_bound(f, psi, lambda, 4.0, 2.0, 2, Dp).status == CheckStatus::inapplicable);
}

TEST_CASE("l2_bound_region is admissible") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto f = sample(path(100), TailSpec::exact(1.0), seed);
    const auto top = top_eigs(assemble(f), 2);
    for (int k = 0; k < 2; ++k) {
      const auto Dp = l2_bound_region(f, top.eigenvalues[k], 2.0, 3.0, 2);
      const auto r = check_l2_bound(f, top.vector(k), top.eigenvalues[k], 2.0, 3.0, 2, Dp);
      CHECK(r.status == CheckStatus::pass);
    }
  }
}

TEST_CASE("martingale examples") {
  const auto f = sample(path(20), TailSpec::exact(1.0), 3);
  const auto top = top_eigs(assemble(f), 1);
  MartingaleOptions mo;
  mo.n_paths = 1000;
  mo.horizon = 0;
  const auto h0 = check_martingale(f, top.vector(0), top.eigenvalues[0], Site{5}, mo);
  CHECK(h0.detail["mean"][0].get<double>() == doctest::Approx(top.vector(0)[5]).epsilon(1e-14));
  CHECK(h0.status == CheckStatus::pass);

  mo.horizon = 5;
  const auto out = check_martingale(f, top.vector(0), top.eigenvalues[0], Site{50}, mo);
  for (const auto& m : out.detail["mean"]) CHECK(m.get<double>() == 0.0);
  CHECK(out.status == CheckStatus::pass);

  mo.n_paths = 100000;
  mo.horizon = 15;
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto g = sample(path(20), TailSpec::exact(1.0), 100 + seed);
    const auto t = top_eigs(assemble(g), 1);
    const Site start = seed % 2 ? t.centers[0] : Site{int(seed)};
    mo.seed = seed;
    const auto r = check_martingale(g, t.vector(0), t.eigenvalues[0], start, mo);
    CHECK(r.lhs < 4.0);
    CHECK(r.status == CheckStatus::pass);
  }
}

TEST_CASE("martingale detects a wrong eigenvalue") {
  const auto f = sample(path(20), TailSpec::exact(1.0), 3);
  const auto top = top_eigs(assemble(f), 1);
  MartingaleOptions mo;
  const Site start{int(top.centers[0][0] > 10 ? 2 : 17)};
  const auto r = check_martingale(f, top.vector(0), top.eigenvalues[0] - 0.5, start, mo);
  CHECK(r.status == CheckStatus::fail);
  CHECK_FALSE(r.falsified());
}

TEST_CASE("decay on a planted peak") {
  const auto f = planted(path(200), -6.0, {{Site{100}, 12.0}});
  const auto top = top_eigs(assemble(f), 1);
  DecayOptions o;
  o.delta = 0.5;
  o.h = 1.0;
  const auto r = check_decay_theorem(f, top, 1, 8, 3.0, o);
  CHECK(r.status == CheckStatus::pass);
  CHECK(r.lhs <= 0.0);
  const auto auto_h = check_decay_theorem(f, top, 1, 8, 3.0);
  CHECK(auto_h.status == CheckStatus::pass);
}

TEST_CASE("decay on a planted peak in d=2") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0, 0}, Site{14, 14}));
  const auto f = planted(D, -6.0, {{Site{7, 7}, 12.0}});
  const auto top = top_eigs(assemble(f), 1);
  const auto r = check_decay_theorem(f, top, 1, 6, 3.0);
  CHECK(r.status == CheckStatus::pass);
}

TEST_CASE("path and walk conditions") {
  const auto f = sample(path(30), TailSpec::exact(1.0), 9);
  const double lambda = principal_eigenvalue(assemble(f));
  for (int R = 1; R <= 5; ++R) CHECK(walk_condition_h(f, lambda, R) <= path_condition_h(f, lambda, R) + 1e-12);
  const auto high = planted(path(3), 100.0, {});
  CHECK(std::isinf(path_condition_h(high, 0.0, 2)));
}

TEST_CASE("fault injection flips deterministic checkers") {
  const auto f = sample(path(40), TailSpec::exact(1.0), 1);
  {
    FaultGuard guard;
    CHECK(fault_injection());
    const auto r = check_truncation(f, 3, 4.0, f.domain());
    CHECK(r.status == CheckStatus::fail);
    CHECK(r.falsified());
  }
  CHECK_FALSE(fault_injection());
  CHECK(check_truncation(f, 3, 4.0, f.domain()).status == CheckStatus::pass);
}

TEST_CASE("coupling with one box holding the whole region") {
  const auto f = planted(path(40), -8.0, {{Site{20}, 10.0}});
  auto box = std::make_shared<const LatticeDomain>(lattice_box(Site{10}, Site{30}));
  const double lbox = principal_eigenvalue(assemble(f.restrict_to(box)));
  const auto r = check_gap_to_eigenvalue_coupling(f, {lbox}, 3, 4.0);
  CHECK(r.status == CheckStatus::pass);
  CHECK(r.lhs <= 2.0 * epsilon_R(1, 4.0, 3));
  CHECK(r.detail["eligible"].get<int>() == 1);

  const auto vac = check_gap_to_eigenvalue_coupling(f, {}, 3, 4.0);
  CHECK(vac.status == CheckStatus::pass);
}

TEST_CASE("report json") {
  const auto f = sample(path(20), TailSpec::exact(1.0), 1);
  const auto j = to_json(check_truncation(f, 3, 4.0, f.domain()));
  CHECK(j["theorem"] == "truncation");
  CHECK(j["status"] == "pass");
  CHECK(j["margin"].get<double>() == doctest::Approx(j["rhs"].get<double>() - j["lhs"].get<double>()));
  CHECK(j["instance"]["sites"] == 20);
}
