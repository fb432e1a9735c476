#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "topspec/lattice.hpp"

namespace topspec {

/// A potential profile phi on a finite support C.
struct Profile {
  std::shared_ptr<const LatticeDomain> support;
  std::vector<double> values;
};

/// sum_{x in C} e^{phi(x)/rho}, evaluated in log space.
double ell(std::span<const double> phi, double rho);
double log_ell(std::span<const double> phi, double rho);
/// Same sum restricted to phi(x) >= -2A. A = +inf gives ell.
double ell_truncated(std::span<const double> phi, double rho, double A);

/// lambda^(1) of Delta + phi on C (Dirichlet).
double principal_eigenvalue(const LatticeDomain& C, std::span<const double> phi);
/// lambda^(1), lambda^(2) of Delta + phi on C; the second is -inf when |C| = 1.
std::pair<double, double> top_two(const LatticeDomain& C, std::span<const double> phi);

struct ChiOptions {
  double tol = 1e-12;
  int max_iterations = 20000;
  int random_starts = 3;
  std::uint64_t seed = 0x5eedc41ULL;
  /// Extra starting profile tried besides the random and delta starts.
  std::vector<double> warm_start;
};

struct ChiRun {
  std::string start;
  double chi = 0.0;
  int iterations = 0;
  bool converged = false;
  bool used_fallback = false;
};

struct ChiSolution {
  double chi = 0.0;
  Profile optimizer;
  Eigen::VectorXd eigvec;
  int iterations = 0;
  double kkt_residual = 0.0;
  bool used_fallback = false;
  std::vector<ChiRun> runs;
  /// lambda_n of the winning run, one entry per iteration.
  std::vector<double> trace;
};

/// chi_C = -sup{ lambda^(1)_C(phi) : L_C(phi) <= 1 }.
ChiSolution solve_chi(std::shared_ptr<const LatticeDomain> C, double rho, const ChiOptions& opts = {});

struct ChiInfinite {
  double chi = 0.0;
  double error = 0.0;
  std::vector<int> radii;
  std::vector<double> values;
};

/// chi_{B_n} for n = 0..max_n with warm starts, stopping early once the drop falls below stop_tol (if positive).
std::vector<ChiSolution> chi_balls(double rho, int d, int max_n, double stop_tol = 0.0);

/// chi_{B_n} over l1 balls B_n of increasing n until the drop is below tol. Throws ConvergenceError past max_n.
ChiInfinite chi_infinite(double rho, int d, double tol, int max_n = 64);

/// Translation-invariant memo of chi_C; thread safe.
class ChiCache {
 public:
  explicit ChiCache(double rho, ChiOptions opts = {}) : rho_(rho), opts_(std::move(opts)) {}
  double chi(const LatticeDomain& C);
  double rho() const noexcept { return rho_; }

 private:
  double rho_;
  ChiOptions opts_;
  std::mutex mu_;
  std::map<std::vector<int>, double> memo_;
};

enum class CheckStatus { pass, fail, inapplicable, indeterminate };
std::string to_string(CheckStatus s);

struct ImplicationResult {
  CheckStatus status = CheckStatus::pass;
  bool premise = false;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin() const noexcept { return rhs - lhs; }
  std::string note;
};

/// gap <= K  =>  lambda1 - rho log L_C(xi) <= -chi_C + K - rho log 2.
ImplicationResult gap_implication_check(const LatticeDomain& C, std::span<const double> xi, double rho, double K,
                                        double chi_C, double slack = 1e-9);

/// lambda1 >= a  =>  L_{C,A}(xi - a - chi_C) >= e^{-eta(A)/rho}. A = +inf checks L_C(...) >= 1.
ImplicationResult inclusion_check(const LatticeDomain& C, std::span<const double> xi, double rho, double a, double A,
                                  double chi_C, double slack = 1e-9);

/// lambda1 >= a' and gap <= rho log 2 / 2  =>  L_{C,A}(xi - a - chi_C) >= u,
/// log u = (a' - a - eta(A))/rho + log 2 / 2.
ImplicationResult gap_mass_check(const LatticeDomain& C, std::span<const double> xi, double rho, double a,
                                 double a_prime, double A, double chi_C, double slack = 1e-9);

/// A0 with A0 (1 + A0/4d) = 4d.
double confinement_A0(int d);
/// A' = -rho log(2 sinh delta) / 2.
double confinement_A_prime(double rho, double delta);

struct ConfinementResult {
  CheckStatus status = CheckStatus::pass;
  bool premise = false;
  std::size_t S_size = 0;
  int S_diameter = 0;
  /// 2 |S| r.
  double diameter_bound = 0.0;
  /// 2 e^{delta + 2A/rho}.
  double c = 0.0;
  std::string note;
};

/// Under L_{C,A}(xi - a - chi_C) <= e^delta and lambda1 >= a + 2d(1 + (A'-d)/2d)^{1-2r}, the set
/// S = { xi - a - chi_C > -2A' } has l1 diameter at most 2|S| r.
ConfinementResult confinement_check(const LatticeDomain& C, std::span<const double> xi, double rho, double a,
                                    double A, double delta, int r, double chi_C);

}  // namespace topspec
