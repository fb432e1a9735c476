#pragma once

#include <climits>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "topspec/field.hpp"
#include "topspec/lattice.hpp"

namespace topspec {

/// D_{R,A}(xi) with its components, their principal eigenpairs and trimming flags.
struct RegionDecomposition {
  std::shared_ptr<const LatticeDomain> base;
  int R = 1;
  double A = 1.0;
  double lambda1 = 0.0;
  LatticeDomain region;
  std::vector<LatticeDomain> components;
  std::vector<double> principal_values;
  std::vector<Eigen::VectorXd> principal_vectors;
  /// trimmed[i] iff lambda_C < lambda1 - A, except that the highest component is kept when
  /// it sits within epsilon_R of the cut.
  std::vector<bool> trimmed;

  /// Index of the component containing `s`, or -1.
  int component_of(const Site& s) const;
};

/// The union of B_R(z) ∩ D over z with xi(z) >= lambda1 - 2A.
LatticeDomain large_field_region(const PotentialField& field, int R, double A, double lambda1);

/// lambda1 is lambda^(1)_D(xi), computed by the caller.
RegionDecomposition extract(const PotentialField& field, int R, double A, double lambda1);

/// Union of the untrimmed components. Throws PreconditionError when every component is trimmed.
LatticeDomain trim(const RegionDecomposition& dec);

/// Graph distance on D after contracting each component to one vertex.
struct ContractedDistance {
  static constexpr int kInfinity = INT_MAX;

  std::shared_ptr<const LatticeDomain> base;
  /// dist[c][i] = d(base[i], component c).
  std::vector<std::vector<int>> dist;

  int operator()(std::size_t component, std::size_t site_index) const { return dist[component][site_index]; }
};

ContractedDistance contracted_distance(const RegionDecomposition& dec);

struct DistanceComparison {
  std::size_t pairs = 0;
  /// Pairs with d(x, C) > dist(x, C); must be zero.
  std::size_t upper_violations = 0;
  /// Smallest c1 with c2 = 0: min d / dist over pairs with dist > 0.
  double c1_at_c2_zero = 1.0;
  /// Smallest c2 with c1 = 1: max (dist - d) / R.
  double c2_at_c1_one = 0.0;
};

/// Compares d(x, C) with the l1 distance dist(x, C) over every site and component.
DistanceComparison distance_compare(const RegionDecomposition& dec, const ContractedDistance& cd);

struct DistanceAxiomReport {
  std::size_t checked = 0;
  std::size_t d0_violations = 0;
  std::size_t d1_violations = 0;
  std::size_t d2_violations = 0;
  bool ok() const noexcept { return d0_violations + d1_violations + d2_violations == 0; }
};

/// Exhaustive check of (D0)-(D2). In (D1), y ranges over the sites of D at l1 distance exactly R from z.
DistanceAxiomReport check_distance_axioms(const RegionDecomposition& dec, const ContractedDistance& cd);

}  // namespace topspec
