#include "topspec/regions.hpp"

#include <algorithm>
#include <deque>
#include <unordered_set>

#include "topspec/bounds.hpp"
#include "topspec/error.hpp"
#include "topspec/hamiltonian.hpp"
#include "topspec/spectrum.hpp"

namespace topspec {

int RegionDecomposition::component_of(const Site& s) const {
  for (std::size_t c = 0; c < components.size(); ++c)
    if (components[c].contains(s)) return static_cast<int>(c);
  return -1;
}

LatticeDomain large_field_region(const PotentialField& field, int R, double A, double lambda1) {
  const auto& D = field.domain();
  const double cut = lambda1 - 2.0 * A;
  std::vector<std::uint8_t> in(D.size(), 0);
  for (std::size_t i = 0; i < D.size(); ++i) {
    if (field[i] < cut) continue;
    for (const auto& s : ball(D[i], R, &D)) in[*D.index_of(s)] = 1;
  }
  std::vector<Site> sites;
  for (std::size_t i = 0; i < D.size(); ++i)
    if (in[i]) sites.push_back(D[i]);
  return LatticeDomain(D.dim(), std::move(sites));
}

RegionDecomposition extract(const PotentialField& field, int R, double A, double lambda1) {
  if (R < 1) throw PreconditionError("extract: R must be >= 1");
  if (!(A > 0.0)) throw PreconditionError("extract: A must be > 0");
  RegionDecomposition dec;
  dec.base = field.domain_ptr();
  dec.R = R;
  dec.A = A;
  dec.lambda1 = lambda1;
  dec.region = large_field_region(field, R, A, lambda1);
  dec.components = connected_components(dec.region);

  const Hamiltonian H = assemble(field);
  EigOptions opts;
  for (const auto& comp : dec.components) {
    auto sub = restrict_to(H, std::make_shared<const LatticeDomain>(comp));
    auto res = top_eigs(sub, 1, opts);
    dec.principal_values.push_back(res.eigenvalues[0]);
    dec.principal_vectors.emplace_back(res.eigenvectors.col(0));
  }

  const double cut = lambda1 - A;
  dec.trimmed.resize(dec.components.size());
  for (std::size_t c = 0; c < dec.components.size(); ++c) dec.trimmed[c] = dec.principal_values[c] < cut;
  if (!dec.components.empty()) {
    const auto top = static_cast<std::size_t>(
        std::max_element(dec.principal_values.begin(), dec.principal_values.end()) - dec.principal_values.begin());
    if (dec.trimmed[top] && dec.principal_values[top] >= cut - epsilon_R(field.domain().dim(), A, R))
      dec.trimmed[top] = false;
  }
  return dec;
}

LatticeDomain trim(const RegionDecomposition& dec) {
  std::vector<Site> keep;
  for (std::size_t c = 0; c < dec.components.size(); ++c)
    if (!dec.trimmed[c]) keep.insert(keep.end(), dec.components[c].begin(), dec.components[c].end());
  if (keep.empty()) throw PreconditionError("trim: every component was trimmed");
  return LatticeDomain(dec.base->dim(), std::move(keep));
}

ContractedDistance contracted_distance(const RegionDecomposition& dec) {
  const auto& D = *dec.base;
  const std::size_t n = D.size();
  const int nd = 2 * D.dim();
  std::vector<int> owner(n, -1);
  std::vector<std::vector<std::size_t>> members(dec.components.size());
  for (std::size_t c = 0; c < dec.components.size(); ++c)
    for (const auto& s : dec.components[c]) {
      const auto i = *D.index_of(s);
      owner[i] = static_cast<int>(c);
      members[c].push_back(i);
    }

  ContractedDistance cd;
  cd.base = dec.base;
  cd.dist.assign(dec.components.size(), std::vector<int>(n, ContractedDistance::kInfinity));
  std::deque<std::size_t> queue;
  for (std::size_t c = 0; c < dec.components.size(); ++c) {
    auto& dist = cd.dist[c];
    queue.clear();
    for (auto i : members[c]) {
      dist[i] = 0;
      queue.push_back(i);
    }
    while (!queue.empty()) {
      const auto i = queue.front();
      queue.pop_front();
      for (int dir = 0; dir < nd; ++dir) {
        const auto j = D.neighbor(i, dir);
        if (j == LatticeDomain::kNone) continue;
        const auto ju = static_cast<std::size_t>(j);
        if (dist[ju] != ContractedDistance::kInfinity) continue;
        if (owner[ju] >= 0) {
          for (auto m : members[static_cast<std::size_t>(owner[ju])]) {
            dist[m] = dist[i] + 1;
            queue.push_back(m);
          }
        } else {
          dist[ju] = dist[i] + 1;
          queue.push_back(ju);
        }
      }
    }
  }
  return cd;
}

DistanceComparison distance_compare(const RegionDecomposition& dec, const ContractedDistance& cd) {
  DistanceComparison out;
  const auto& D = *dec.base;
  for (std::size_t c = 0; c < dec.components.size(); ++c) {
    for (std::size_t i = 0; i < D.size(); ++i) {
      const int dd = cd(c, i);
      if (dd == ContractedDistance::kInfinity) continue;
      const int l1 = l1_distance(D[i], dec.components[c]);
      ++out.pairs;
      if (dd > l1) ++out.upper_violations;
      if (l1 > 0) out.c1_at_c2_zero = std::min(out.c1_at_c2_zero, static_cast<double>(dd) / l1);
      out.c2_at_c1_one = std::max(out.c2_at_c1_one, static_cast<double>(l1 - dd) / dec.R);
    }
  }
  return out;
}

DistanceAxiomReport check_distance_axioms(const RegionDecomposition& dec, const ContractedDistance& cd) {
  DistanceAxiomReport rep;
  const auto& D = *dec.base;
  const auto inf = ContractedDistance::kInfinity;
  auto le_plus = [inf](int a, int b, int add) { return b == inf || (a != inf && a <= b + add); };

  for (std::size_t c = 0; c < dec.components.size(); ++c) {
    for (const auto& s : dec.components[c]) {
      ++rep.checked;
      if (cd(c, *D.index_of(s)) != 0) ++rep.d0_violations;
    }
    for (std::size_t i = 0; i < D.size(); ++i) {
      if (cd(c, i) < 0) ++rep.d0_violations;
      if (dec.region.contains(D[i])) continue;
      for (const auto& y : ball(D[i], dec.R, &D)) {
        if (l1_distance(y, D[i]) != dec.R) continue;
        ++rep.checked;
        if (!le_plus(cd(c, i), cd(c, *D.index_of(y)), dec.R)) ++rep.d1_violations;
      }
    }
    for (std::size_t c2 = 0; c2 < dec.components.size(); ++c2) {
      if (c2 == c) continue;
      const auto rim = boundary(dec.components[c2]);
      for (const auto& z : dec.components[c2]) {
        const int dz = cd(c, *D.index_of(z));
        for (const auto& y : rim) {
          const auto yi = D.index_of(y);
          if (!yi) continue;
          ++rep.checked;
          if (!le_plus(dz, cd(c, *yi), 1)) ++rep.d2_violations;
        }
      }
    }
  }
  return rep;
}

}  // namespace topspec
