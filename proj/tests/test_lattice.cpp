#include <doctest.h>

#include <cmath>

#include <algorithm>
#include <set>

#include "topspec/error.hpp"
#include "topspec/lattice.hpp"
#include "topspec/rng.hpp"

using namespace topspec;

namespace {

std::vector<int> coords1(const LatticeDomain& D) {
  std::vector<int> out;
  for (const auto& s : D) out.push_back(s[0]);
  return out;
}

LatticeDomain line(std::initializer_list<int> xs) {
  std::vector<Site> v;
  for (int x : xs) v.push_back(Site{x});
  return LatticeDomain(1, v);
}

LatticeDomain random_subset(int d, int side, double p, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Site> v;
  const auto box = lattice_box(Site::origin(d), d == 1 ? Site{side - 1} : Site{side - 1, side - 1});
  for (const auto& s : box)
    if (rng.uniform() < p) v.push_back(s);
  return LatticeDomain(d, v);
}

}  // namespace

TEST_CASE("scale_domain examples") {
  CHECK(coords1(scale_domain(ContinuumShape::unit_box(1), 4)) == std::vector<int>{1, 2, 3});
  const auto D2 = scale_domain(ContinuumShape::unit_box(2), 2);
  REQUIRE(D2.size() == 1);
  CHECK(D2[0] == Site{1, 1});
  CHECK(scale_domain(ContinuumShape::unit_box(1), 100).size() == 99);
  CHECK_THROWS_AS(scale_domain(ContinuumShape::unit_box(1), 1), DomainError);
}

TEST_CASE("scale_domain of a ball and a union of boxes") {
  const auto B = scale_domain(ContinuumShape::ball({0.0, 0.0}, 1.0), 3);
  for (const auto& s : B) CHECK(s[0] * s[0] + s[1] * s[1] < 9);
  CHECK(B.size() == 25);
  const auto U = scale_domain(ContinuumShape::union_of({{{0.0}, {0.3}}, {{0.5}, {1.0}}}), 10);
  CHECK(coords1(U) == std::vector<int>{1, 2, 6, 7, 8, 9});
}

TEST_CASE("scale_domain is monotone up to distance d") {
  for (int d : {1, 2}) {
    for (const auto& shape : {ContinuumShape::unit_box(d), ContinuumShape::ball(std::vector<double>(d, 0.5), 0.5)}) {
      const int L = 7, Lp = 12;
      const auto small = scale_domain(shape, L);
      const auto big = scale_domain(shape, Lp);
      for (const auto& s : small) {
        std::vector<int> c(static_cast<std::size_t>(d));
        for (int a = 0; a < d; ++a) c[static_cast<std::size_t>(a)] = static_cast<int>(std::lround(s[a] * double(Lp) / L));
        CHECK(l1_distance(Site(std::span<const int>(c)), big) <= d);
      }
    }
  }
}

TEST_CASE("continuum shape validation") {
  CHECK_THROWS_AS(ContinuumShape::box({0.0}, {0.0}).validate(), DomainError);
  CHECK_THROWS_AS(ContinuumShape::ball({0.0}, -1.0).validate(), DomainError);
  CHECK(ContinuumShape::unit_box(3).volume() == doctest::Approx(1.0));
  CHECK_FALSE(ContinuumShape::unit_box(1).contains(std::vector<double>{0.0}));
}

TEST_CASE("domain storage is sorted and duplicate free") {
  const LatticeDomain D(1, {Site{3}, Site{1}, Site{3}, Site{2}});
  CHECK(coords1(D) == std::vector<int>{1, 2, 3});
  CHECK(D.contains(Site{2}));
  CHECK_FALSE(D.contains(Site{4}));
  CHECK(*D.index_of(Site{3}) == 2);
  CHECK(D.neighbor(0, 0) == LatticeDomain::kNone);
  CHECK(D.neighbor(0, 1) == 1);
  CHECK(D.degree(1) == 2);
  CHECK(D.diameter() == 2);
}

TEST_CASE("ball examples") {
  CHECK(ball(Site{0, 0}, 1).size() == 5);
  const auto b0 = ball(Site{0}, 0);
  REQUIRE(b0.size() == 1);
  CHECK(b0[0] == Site{0});
  const auto within = lattice_box(Site{0}, Site{6});
  CHECK(coords1(ball(Site{5}, 2, &within)) == std::vector<int>{3, 4, 5, 6});
  CHECK(ball(Site{0, 0, 0}, 2).size() == 25);
}

TEST_CASE("connected_components examples") {
  const auto comps = connected_components(line({0, 1, 2, 5, 6}));
  REQUIRE(comps.size() == 2);
  CHECK(coords1(comps[0]) == std::vector<int>{0, 1, 2});
  CHECK(coords1(comps[1]) == std::vector<int>{5, 6});
  CHECK(connected_components(LatticeDomain(1)).empty());
  CHECK(connected_components(LatticeDomain(2, {Site{0, 0}, Site{1, 1}})).size() == 2);
}

TEST_CASE("components partition U with no edge between them") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto U = random_subset(2, 12, 0.55, seed);
    const auto comps = connected_components(U);
    std::size_t total = 0;
    std::vector<int> label(U.size(), -1);
    for (std::size_t c = 0; c < comps.size(); ++c) {
      total += comps[c].size();
      for (const auto& s : comps[c]) {
        auto& l = label[*U.index_of(s)];
        CHECK(l == -1);
        l = static_cast<int>(c);
      }
      if (c > 0) CHECK(comps[c - 1][0] < comps[c][0]);
    }
    CHECK(total == U.size());
    for (std::size_t i = 0; i < U.size(); ++i)
      for (int dir = 0; dir < 4; ++dir) {
        const auto j = U.neighbor(i, dir);
        if (j != LatticeDomain::kNone) CHECK(label[i] == label[static_cast<std::size_t>(j)]);
      }
  }
}

TEST_CASE("boundary examples") {
  CHECK(coords1(boundary(line({0}))) == std::vector<int>{-1, 1});
  CHECK(coords1(boundary(line({0, 1}))) == std::vector<int>{-1, 2});
  CHECK(boundary(LatticeDomain(2, {Site{0, 0}})).size() == 4);
}

TEST_CASE("boundary is disjoint from V and touches it") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto V = random_subset(2, 10, 0.4, seed);
    const auto B = boundary(V);
    for (const auto& s : B) {
      CHECK_FALSE(V.contains(s));
      int touching = 0;
      for (int dir = 0; dir < 4; ++dir) touching += V.contains(s.neighbor(dir));
      CHECK(touching >= 1);
    }
  }
}

TEST_CASE("set operations and distances") {
  const auto a = line({0, 1, 2, 3});
  const auto b = line({2, 3, 4});
  CHECK(coords1(set_difference(a, b)) == std::vector<int>{0, 1});
  CHECK(coords1(set_union(a, b)) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(line({1, 2}).is_subset_of(a));
  CHECK_FALSE(b.is_subset_of(a));
  CHECK(l1_distance(Site{9}, b) == 5);
  CHECK(l1_distance(Site{1, -2}, Site{-1, 1}) == 5);
}

TEST_CASE("site ordering is lexicographic") {
  std::set<Site> s{Site{1, 0}, Site{0, 5}, Site{0, -1}};
  CHECK(*s.begin() == Site{0, -1});
  CHECK(*s.rbegin() == Site{1, 0});
  CHECK(Site{2, 3}.neighbor(0) == Site{1, 3});
  CHECK(Site{2, 3}.neighbor(3) == Site{2, 4});
}
