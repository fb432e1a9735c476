#include <doctest.h>

#include <cmath>
#include <numbers>

#include "topspec/error.hpp"
#include "topspec/evt.hpp"
#include "topspec/variational.hpp"

using namespace topspec;

namespace {

SpectralResult manual_result(std::shared_ptr<const LatticeDomain> D, std::vector<double> values,
                             std::vector<Site> centers) {
  SpectralResult r;
  r.domain = std::move(D);
  r.eigenvalues = std::move(values);
  r.centers = std::move(centers);
  return r;
}

}  // namespace

TEST_CASE("make_plan examples") {
  PlanOverrides ov;
  ov.N = 4;
  const auto big = make_plan(ContinuumShape::unit_box(1), 10000, ov);
  CHECK(big.domain_size == 9999);
  CHECK(big.pitch == 5);
  CHECK(big.m() == 2000);
  for (std::size_t i = 0; i < big.m(); ++i) {
    const auto b = big.box(i);
    CHECK(b.size() == 4);
    CHECK(b[0][0] >= 1);
    CHECK(b[3][0] <= 9999);
  }

  const auto small = make_plan(ContinuumShape::box({-0.01}, {0.95}), 10, ov);
  CHECK(small.domain_size == 10);
  REQUIRE(small.m() == 2);
  CHECK(small.box(0) == lattice_box(Site{0}, Site{3}));
  CHECK(small.box(1) == lattice_box(Site{5}, Site{8}));

  PlanOverrides bad;
  bad.N = 10000;
  CHECK_THROWS_AS(make_plan(ContinuumShape::unit_box(1), 10000, bad), PreconditionError);
  PlanOverrides one;
  one.N = 6;
  CHECK_THROWS_AS(make_plan(ContinuumShape::box({-0.01}, {0.95}), 10, one), PreconditionError);
}

TEST_CASE("default plan") {
  const auto p = make_plan(ContinuumShape::unit_box(1), 10000);
  const double ll = std::log(std::log(10000.0));
  CHECK(p.R == int(std::ceil(ll * ll)));
  CHECK(p.N == int(std::ceil(std::pow(std::log(10000.0), 3))));
  CHECK(p.pitch == p.N + 1);
  CHECK(p.ratios.contains("R_over_loglogL"));
  const auto q = make_plan(ContinuumShape::unit_box(1), 100);
  CHECK(q.N == 25);
  const auto p2 = make_plan(ContinuumShape::unit_box(2), 200);
  for (std::size_t i = 0; i < p2.m(); ++i) CHECK(p2.box(i).size() == std::size_t(p2.N * p2.N));
}

TEST_CASE("box_eigenvalues") {
  PlanOverrides ov;
  ov.N = 2;
  const auto plan = make_plan(ContinuumShape::box({-0.01}, {0.45}), 10, ov);
  REQUIRE(plan.m() == 2);
  auto D = std::make_shared<const LatticeDomain>(scale_domain(plan.shape, 10));
  const PotentialField flat(D, std::vector<double>(D->size(), 0.0), TailSpec::exact(1.0), 0);
  for (double v : box_eigenvalues(flat, plan)) CHECK(v == doctest::Approx(-2.0 + 2.0 * std::cos(std::numbers::pi / 3)).epsilon(1e-12));

  const auto p = make_plan(ContinuumShape::unit_box(2), 60);
  auto D2 = std::make_shared<const LatticeDomain>(scale_domain(p.shape, 60));
  const auto f = sample(D2, TailSpec::exact(1.0), 4);
  const auto ev = box_eigenvalues(f, p, 3);
  REQUIRE(ev.size() == p.m());
  for (std::size_t i = 0; i < p.m(); i += 3)
    CHECK(ev[i] == doctest::Approx(principal_eigenvalue(assemble(f.restrict_to(std::make_shared<const LatticeDomain>(p.box(i)))))));
}

TEST_CASE("box eigenvalues of distinct boxes are uncorrelated") {
  PlanOverrides ov;
  ov.N = 10;
  const auto plan = make_plan(ContinuumShape::unit_box(1), 40, ov);
  auto D = std::make_shared<const LatticeDomain>(scale_domain(plan.shape, 40));
  std::vector<double> a, b;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    const auto ev = box_eigenvalues(sample(D, TailSpec::exact(1.0), s), plan);
    a.push_back(ev[0]);
    b.push_back(ev[1]);
  }
  CHECK(std::abs(stats::correlation(a, b)) < 0.1);
}

TEST_CASE("estimate_a_L") {
  PlanOverrides ov;
  ov.N = 4;
  const auto plan = make_plan(ContinuumShape::box({0.0}, {2.0}), 8, ov);
  const auto est = estimate_a_L(TailSpec::exact(1.0), plan, 501, 3);
  CHECK(est.target_probability == doctest::Approx(0.5));
  CHECK(est.a_L == stats::quantile(est.samples, 0.5));
  CHECK(est.se > 0.0);

  const auto p = make_plan(ContinuumShape::unit_box(1), 1000);
  CHECK_THROWS_AS(estimate_a_L(TailSpec::exact(1.0), p, 10, 1), PreconditionError);
}

TEST_CASE("a_L is stable under doubling n_mc") {
  PlanOverrides ov;
  ov.N = 5;
  const auto plan = make_plan(ContinuumShape::unit_box(1), 100, ov);
  int ok = 0;
  const int reps = 40;
  for (int r = 0; r < reps; ++r) {
    const auto a = estimate_a_L(TailSpec::exact(1.0), plan, 400, 1000 + r);
    const auto b = estimate_a_L(TailSpec::exact(1.0), plan, 800, 1000 + r);
    ok += std::abs(a.a_L - b.a_L) < 2.0 * std::max(a.se, b.se);
  }
  CHECK(ok >= int(0.95 * reps));
}

TEST_CASE("a_L sits below hat_a") {
  const auto spec = TailSpec::exact(1.0);
  const int L = 10000;
  const auto plan = make_plan(ContinuumShape::unit_box(1), L);
  const auto est = estimate_a_L(spec, plan, 2000, 5);
  const double ha = hat_a(spec, L, 1);
  CHECK(est.a_L < ha);
  CHECK(est.a_L > ha - 3.0);
}

TEST_CASE("rescale examples and equivariance") {
  const auto plan = make_plan(ContinuumShape::unit_box(1), 1000);
  auto D = std::make_shared<const LatticeDomain>(scale_domain(plan.shape, 1000));
  const double logD = std::log(double(D->size()));
  const double a = 1.25, rho = 2.0;
  const auto r = manual_result(D, {a + rho / logD, a}, {Site{500}, Site{250}});
  const auto pc = rescale(r, plan, a, rho);
  CHECK(pc.heights[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pc.heights[1] == 0.0);
  CHECK(pc.positions[0][0] == 0.5);
  CHECK(pc.positions[1][0] == 0.25);
  const auto shifted = rescale(manual_result(D, {a + rho / logD + 3.0, a + 3.0}, r.centers), plan, a + 3.0, rho);
  for (int k = 0; k < 2; ++k) CHECK(shifted.heights[k] == doctest::Approx(pc.heights[k]).epsilon(1e-12));
  CHECK_THROWS_AS(rescale(r, plan, std::nan(""), rho), PreconditionError);
  const auto W = pc.W();
  CHECK(W[1] == doctest::Approx(1.0));
  CHECK(W[0] == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("synthetic clouds") {
  const auto shape = ContinuumShape::ball({0.5, 0.5}, 0.5);
  const auto pc = synthetic_cloud(shape, 8, 11);
  REQUIRE(pc.heights.size() == 8);
  for (std::size_t k = 0; k < 8; ++k) {
    CHECK(shape.contains(pc.positions[k]));
    if (k) CHECK(pc.heights[k] < pc.heights[k - 1]);
  }
  const auto again = synthetic_cloud(shape, 8, 11);
  CHECK(again.heights == pc.heights);
}

TEST_CASE("poisson tests on the limit law and on a distorted law") {
  const auto shape = ContinuumShape::unit_box(1);
  std::vector<PointCloud> good, bad;
  for (std::uint64_t s = 0; s < 300; ++s) {
    good.push_back(synthetic_cloud(shape, 5, s));
    auto b = synthetic_cloud(shape, 5, 10000 + s);
    for (std::size_t k = 0; k < b.heights.size(); ++k) b.heights[k] = b.heights[0] - 3.0 * double(k) * (b.heights[0] - b.heights[k]);
    for (auto& x : b.positions) x[0] = x[0] * x[0];
    bad.push_back(b);
  }
  const auto ok = poisson_tests(good, shape);
  CHECK(ok.all_pass);
  CHECK(ok.clouds == 300);
  CHECK(ok.qq_empirical.size() == ok.qq_theoretical.size());
  const auto no = poisson_tests(bad, shape);
  CHECK_FALSE(no.all_pass);
  CHECK(no.positions.p_value < 1e-6);
  CHECK(no.increments.p_value < 1e-6);
  CHECK_THROWS_AS(poisson_tests(std::vector<PointCloud>(good.begin(), good.begin() + 50), shape), PreconditionError);
}

TEST_CASE("chi gap statistic examples") {
  auto one = std::make_shared<const LatticeDomain>(LatticeDomain(2, {Site{0, 0}}));
  const PotentialField f1(one, {3.5}, TailSpec::exact(1.0), 0);
  CHECK(chi_gap_statistic(top_eigs(assemble(f1), 1), f1) == doctest::Approx(4.0).epsilon(1e-12));
  for (int n : {3, 10, 50}) {
    auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{n - 1}));
    const PotentialField f(D, std::vector<double>(D->size(), 0.0), TailSpec::exact(1.0), 0);
    CHECK(chi_gap_statistic(top_eigs(assemble(f), 1), f) == doctest::Approx(2.0 - 2.0 * std::cos(std::numbers::pi / (n + 1))).epsilon(1e-10));
  }
}

TEST_CASE("localization_mass examples") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{99}));
  std::vector<double> v(100, -6.0);
  v[40] = 12.0;
  const PotentialField f(D, v, TailSpec::exact(1.0), 0);
  const auto r = top_eigs(assemble(f), 2);
  CHECK(localization_mass(r, 1, D->diameter()) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(localization_mass(r, 1, 0) == doctest::Approx(r.vector(0)[40] * r.vector(0)[40]).epsilon(1e-14));
  CHECK(localization_mass(r, 1, 10) > 0.99);
  const auto g = sample(D, TailSpec::exact(1.0), 3);
  const auto rg = top_eigs(assemble(g), 3);
  for (int k = 1; k <= 3; ++k)
    for (int rad = 0; rad < 20; ++rad) CHECK(localization_mass(rg, k, rad) <= localization_mass(rg, k, rad + 1) + 1e-15);
}

TEST_CASE("decay_fit recovers a planted slope") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{-40}, Site{40}));
  Eigen::VectorXd psi(static_cast<Eigen::Index>(D->size()));
  for (std::size_t i = 0; i < D->size(); ++i) psi[static_cast<Eigen::Index>(i)] = std::exp(-0.7 * std::abs((*D)[i][0]));
  psi.normalize();
  auto r = manual_result(D, {0.0}, {Site{0}});
  r.eigenvectors = psi;
  const auto fit = decay_fit(r, 1, 20.0);
  CHECK(fit.c2_near == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(fit.far_available);
  CHECK(fit.c2_far == doctest::Approx(0.7).epsilon(1e-6));
  const auto tight = decay_fit(r, 1, 39.5);
  CHECK_FALSE(tight.far_available);
  CHECK_THROWS_AS(decay_fit(r, 2, 5.0), PreconditionError);
}

TEST_CASE("decay slopes on planted peaks are positive") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{199}));
  for (std::uint64_t s = 1; s <= 20; ++s) {
    auto v = sample(D, TailSpec::exact(1.0), s);
    std::vector<double> vals(v.values().begin(), v.values().end());
    vals[50 + s * 5] += 8.0;
    const PotentialField f(D, vals, TailSpec::exact(1.0), s);
    const auto r = top_eigs(assemble(f), 1);
    const auto fit = decay_fit(r, 1, std::log(200.0));
    CHECK(fit.c2_near > 0.0);
    if (fit.far_available) CHECK(fit.c2_far > 0.0);
  }
}

TEST_CASE("max order report at s = 0 matches the quantile") {
  PlanOverrides ov;
  ov.N = 10;
  const auto plan = make_plan(ContinuumShape::unit_box(1), 200, ov);
  const auto est = estimate_a_L(TailSpec::exact(1.0), plan, 4000, 9);
  const auto rows = max_order_report(est, plan, 1.0, {-1.0, 0.0, 1.0});
  REQUIRE(rows.size() == 3);
  CHECK(std::abs(rows[1].ratio - 1.0) < 0.05);
  CHECK(rows[0].ratio > rows[1].ratio);
  CHECK(rows[2].ratio < rows[1].ratio);
  CHECK(rows[2].expected == doctest::Approx(std::exp(-1.0)));
}

TEST_CASE("partition stability") {
  const auto ps = partition_stability(TailSpec::exact(1.0), 1, 40, 4, 1.0, 4000, 3);
  CHECK(ps.p_N >= ps.p_R);
  CHECK(ps.volume_ratio == doctest::Approx(10.0));
  CHECK(ps.lhs == doctest::Approx(-std::log(1.0 - ps.p_N)));
  if (ps.p_R > 0) CHECK(ps.lhs >= (1.0 - ps.c_fit * 4.0 / 40.0) * 10.0 * ps.p_R - 1e-12);
}

TEST_CASE("run_sample") {
  auto D = std::make_shared<const LatticeDomain>(scale_domain(ContinuumShape::unit_box(1), 500));
  SampleOptions o;
  o.k = 3;
  o.keep_vectors = true;
  const auto a = run_sample(D, TailSpec::exact(1.0), 500, 42, o);
  const auto b = run_sample(D, TailSpec::exact(1.0), 500, 42, o);
  CHECK(a.eigenvalues == b.eigenvalues);
  CHECK(a.eigenvalues.size() == 3);
  CHECK(a.chi_gap == doctest::Approx(a.max_xi - a.eigenvalues[0]));
  CHECK(a.mass > 0.0);
  CHECK(a.mass <= 1.0);
  const auto j = to_json(a);
  CHECK(j["seed"] == 42);
  CHECK(j["eigenvalues"].size() == 3);
}
