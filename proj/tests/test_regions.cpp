#include <doctest.h>

#include <algorithm>

#include "topspec/bounds.hpp"
#include "topspec/error.hpp"
#include "topspec/regions.hpp"
#include "topspec/rng.hpp"
#include "topspec/spectrum.hpp"

using namespace topspec;

namespace {

std::shared_ptr<const LatticeDomain> path(int lo, int hi) {
  return std::make_shared<const LatticeDomain>(lattice_box(Site{lo}, Site{hi}));
}

std::vector<int> coords1(const LatticeDomain& D) {
  std::vector<int> out;
  for (const auto& s : D) out.push_back(s[0]);
  return out;
}

PotentialField peaks(std::shared_ptr<const LatticeDomain> D, double background,
                     std::initializer_list<std::pair<int, double>> ps) {
  std::vector<double> v(D->size(), background);
  for (auto [x, h] : ps) v[*D->index_of(Site{x})] = h;
  return PotentialField(D, v, TailSpec::exact(1.0), 0);
}

RegionDecomposition decompose(const PotentialField& f, int R, double A) {
  return extract(f, R, A, principal_eigenvalue(assemble(f)));
}

RegionDecomposition manual(std::shared_ptr<const LatticeDomain> D, std::vector<LatticeDomain> comps) {
  RegionDecomposition dec;
  dec.base = D;
  dec.components = std::move(comps);
  return dec;
}

}  // namespace

TEST_CASE("extract examples") {
  const auto flat = PotentialField(path(0, 1), {0.0, 0.0}, TailSpec::exact(1.0), 0);
  const auto d0 = decompose(flat, 1, 1.0);
  CHECK(d0.region == flat.domain());
  CHECK(d0.components.size() == 1);

  const auto f = peaks(path(0, 20), -10.0, {{3, 10.0}});
  const auto dec = decompose(f, 2, 1.0);
  CHECK(dec.lambda1 > 8.0);
  CHECK(dec.lambda1 < 9.0);
  CHECK(coords1(dec.region) == std::vector<int>{1, 2, 3, 4, 5});
  CHECK(dec.components.size() == 1);
  CHECK_FALSE(dec.trimmed[0]);

  const auto huge = decompose(f, 1, 100.0);
  CHECK(huge.region == f.domain());
}

TEST_CASE("region matches its definition") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0, 0}, Site{14, 14}));
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto f = sample(D, TailSpec::exact(1.0), seed);
    const double l1 = principal_eigenvalue(assemble(f));
    const int R = 2;
    const double A = 1.5;
    const auto dec = extract(f, R, A, l1);
    for (std::size_t i = 0; i < D->size(); ++i) {
      bool in = false;
      for (std::size_t z = 0; z < D->size() && !in; ++z)
        in = f[z] >= l1 - 2 * A && l1_distance((*D)[i], (*D)[z]) <= R;
      CHECK(dec.region.contains((*D)[i]) == in);
    }
    std::size_t total = 0;
    for (std::size_t c = 0; c < dec.components.size(); ++c) {
      total += dec.components[c].size();
      CHECK(dec.trimmed[c] == (dec.principal_values[c] < l1 - A &&
                               !(dec.principal_values[c] >= l1 - A - epsilon_R(2, A, R) &&
                                 dec.principal_values[c] == *std::max_element(dec.principal_values.begin(), dec.principal_values.end()))));
    }
    CHECK(total == dec.region.size());
  }
}

TEST_CASE("trim examples") {
  const auto single = peaks(path(0, 30), -10.0, {{15, 10.0}});
  const auto d1 = decompose(single, 2, 1.0);
  CHECK(trim(d1) == d1.region);

  const auto flat = PotentialField(path(0, 5), std::vector<double>(6, 0.0), TailSpec::exact(1.0), 0);
  const auto df = decompose(flat, 1, 1.0);
  CHECK(trim(df) == df.region);

  const auto two = peaks(path(0, 99), -10.0, {{20, 10.0}, {70, 2.0}});
  const auto d2 = decompose(two, 2, 5.0);
  REQUIRE(d2.components.size() == 2);
  CHECK(d2.component_of(Site{70}) == 1);
  CHECK_FALSE(d2.trimmed[0]);
  CHECK(d2.trimmed[1]);
  CHECK(coords1(trim(d2)) == std::vector<int>{18, 19, 20, 21, 22});
}

TEST_CASE("trim throws when every component is trimmed") {
  auto dec = manual(path(0, 4), {LatticeDomain(1, {Site{2}})});
  dec.region = dec.components[0];
  dec.trimmed = {true};
  CHECK_THROWS_AS(trim(dec), PreconditionError);
}

TEST_CASE("contracted_distance examples") {
  auto D = path(0, 10);
  const auto cd = contracted_distance(manual(D, {lattice_box(Site{4}, Site{6})}));
  for (int x : {4, 5, 6}) CHECK(cd(0, *D->index_of(Site{x})) == 0);
  CHECK(cd(0, *D->index_of(Site{3})) == 1);
  CHECK(cd(0, *D->index_of(Site{7})) == 1);
  CHECK(cd(0, *D->index_of(Site{9})) == 3);
}

TEST_CASE("unreachable sites are infinitely far") {
  auto D = std::make_shared<const LatticeDomain>(LatticeDomain(1, {Site{0}, Site{1}, Site{2}, Site{10}, Site{11}}));
  const auto cd = contracted_distance(manual(D, {LatticeDomain(1, {Site{0}})}));
  CHECK(cd(0, 2) == 2);
  CHECK(cd(0, 3) == ContractedDistance::kInfinity);
}

TEST_CASE("distance_compare examples") {
  auto D = path(0, 20);
  auto dec = manual(D, {lattice_box(Site{0}, Site{2})});
  auto cmp = distance_compare(dec, contracted_distance(dec));
  CHECK(cmp.upper_violations == 0);
  CHECK(cmp.c1_at_c2_zero == 1.0);

  dec = manual(D, {lattice_box(Site{0}, Site{2}), lattice_box(Site{8}, Site{12})});
  const auto cd = contracted_distance(dec);
  const int w = 5;
  const int dist = l1_distance(Site{15}, dec.components[0]);
  CHECK(cd(0, *D->index_of(Site{15})) == dist - w + 1);
  CHECK(distance_compare(dec, cd).upper_violations == 0);
}

TEST_CASE("contracted distance never exceeds l1 distance") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0, 0}, Site{11, 11}));
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto dec = decompose(sample(D, TailSpec::exact(1.0), seed), 1, 1.0 + double(seed % 5));
    CHECK(distance_compare(dec, contracted_distance(dec)).upper_violations == 0);
  }
}

TEST_CASE("distance axioms hold exhaustively") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const int d = seed % 2 ? 1 : 2;
    auto D = std::make_shared<const LatticeDomain>(d == 1 ? lattice_box(Site{0}, Site{199}) : lattice_box(Site{0, 0}, Site{13, 13}));
    const auto f = sample(D, TailSpec::exact(1.0), seed);
    const auto dec = decompose(f, 1 + int(seed % 3), 0.5 + 0.25 * double(seed % 7));
    const auto rep = check_distance_axioms(dec, contracted_distance(dec));
    CHECK(rep.checked > 0);
    CHECK(rep.ok());
  }
}

TEST_CASE("region is monotone in A and R") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0, 0}, Site{15, 15}));
  const auto f = sample(D, TailSpec::exact(1.0), 3);
  const double l1 = principal_eigenvalue(assemble(f));
  for (int R = 1; R <= 3; ++R)
    for (double A = 0.5; A < 4; A += 0.5) {
      const auto base = large_field_region(f, R, A, l1);
      CHECK(base.is_subset_of(large_field_region(f, R, A + 0.5, l1)));
      CHECK(base.is_subset_of(large_field_region(f, R + 1, A, l1)));
    }
}

TEST_CASE("spectrum of the region is the union of component spectra") {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0, 0}, Site{19, 19}));
  std::vector<double> v(D->size());
  CounterRng rng(11);
  for (auto& x : v) x = -6.0 + rng.uniform();
  v[*D->index_of(Site{4, 4})] = 9.0;
  v[*D->index_of(Site{15, 14})] = 8.6;
  v[*D->index_of(Site{15, 15})] = 8.2;
  const PotentialField f(D, v, TailSpec::exact(1.0), 11);
  const auto dec = decompose(f, 1, 1.5);
  REQUIRE(dec.components.size() >= 2);
  auto R = std::make_shared<const LatticeDomain>(dec.region);
  const auto whole = all_eigenvalues(assemble(f.restrict_to(R)));
  std::vector<double> merged;
  for (const auto& c : dec.components) {
    const auto part = all_eigenvalues(assemble(f.restrict_to(std::make_shared<const LatticeDomain>(c))));
    merged.insert(merged.end(), part.begin(), part.end());
  }
  std::sort(merged.begin(), merged.end(), std::greater<>());
  REQUIRE(merged.size() == whole.size());
  for (std::size_t i = 0; i < whole.size(); ++i) CHECK(merged[i] == doctest::Approx(whole[i]).epsilon(1e-10));
  for (std::size_t c = 0; c < dec.components.size(); ++c)
    CHECK(dec.principal_values[c] ==
          doctest::Approx(principal_eigenvalue(assemble(f.restrict_to(std::make_shared<const LatticeDomain>(dec.components[c]))))));
}
