#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topspec/bounds.hpp"
#include "topspec/field.hpp"
#include "topspec/hamiltonian.hpp"
#include "topspec/regions.hpp"
#include "topspec/spectrum.hpp"
#include "topspec/variational.hpp"

namespace topspec {

struct CheckReport {
  std::string theorem;
  nlohmann::json instance = nlohmann::json::object();
  double lhs = 0.0;
  double rhs = 0.0;
  CheckStatus status = CheckStatus::pass;
  std::string note;
  nlohmann::json detail = nlohmann::json::object();

  double margin() const noexcept { return rhs - lhs; }
  bool falsified() const { return status == CheckStatus::fail && !detail.value("statistical", false); }
};

nlohmann::json to_json(const CheckReport& r);

/// Test-only: when set, every deterministic checker reverses its final inequality.
void set_fault_injection(bool on) noexcept;
bool fault_injection() noexcept;

/// Truncation: for k with lambda_D^k >= lambda_D^1 - A/2, |lambda_D^k - lambda_U^k| <= epsilon_R.
/// Inapplicable unless D_{R,A} ⊆ U ⊆ D and epsilon_R <= A/2.
CheckReport check_truncation(const PotentialField& field, int R, double A, const LatticeDomain& U);

/// l2 bound of an eigenfunction on a set D' of low field values far from the high ones.
CheckReport check_l2_bound(const PotentialField& field, std::span<const double> psi, double lambda, double A,
                           double A_prime, int R, const LatticeDomain& D_prime);

/// The largest D' admissible for check_l2_bound.
LatticeDomain l2_bound_region(const PotentialField& field, double lambda, double A, double A_prime, int R);

struct MartingaleOptions {
  std::size_t n_paths = 100000;
  int horizon = 15;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/// Monte Carlo test of E[M_{tau ∧ n}] = psi(start) for n = 0..horizon. z-scores land in detail["z"].
CheckReport check_martingale(const PotentialField& field, std::span<const double> psi, double lambda,
                             const Site& start, const MartingaleOptions& opts);

struct DecayOptions {
  double delta = 0.5;
  /// NaN selects the largest h admissible for the path condition.
  double h = std::numeric_limits<double>::quiet_NaN();
  /// Exhaustive self-avoiding path search up to this R; a walk bound beyond.
  int max_exhaustive_R = 6;
  double slack = 1e-9;
};

/// Largest h with prod 2d/(2d + lambda - xi) <= e^{-hR} over self-avoiding R-site paths inside {xi < lambda}.
/// +inf when no such path exists.
double path_condition_h(const PotentialField& field, double lambda, int R);
/// Same bound over all nearest-neighbour walks (a lower bound for path_condition_h).
double walk_condition_h(const PotentialField& field, double lambda, int R);

/// Eigenfunction decay in the contracted distance for the k-th pair (1-based) of `spectral`.
CheckReport check_decay_theorem(const PotentialField& field, const SpectralResult& spectral, int k, int R, double A,
                                const DecayOptions& opts = {});

/// Coupling of the top eigenvalues of D to the sorted box eigenvalues.
CheckReport check_gap_to_eigenvalue_coupling(const PotentialField& field, std::vector<double> box_eigenvalues,
                                             int R, double A);

}  // namespace topspec
