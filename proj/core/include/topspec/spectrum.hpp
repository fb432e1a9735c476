#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "topspec/hamiltonian.hpp"

namespace topspec {

inline constexpr std::size_t kDenseThreshold = 2000;

enum class SolverKind { automatic, dense, lanczos };

struct EigOptions {
  /// Residual tolerance relative to ||H||_inf.
  double tol = 1e-10;
  SolverKind solver = SolverKind::automatic;
  bool want_vectors = true;
  /// Lanczos: after the top-k are locked, run one more pass in their orthogonal
  /// complement to catch exactly repeated eigenvalues a single Krylov space cannot see.
  bool multiplicity_check = true;
  /// Lanczos: largest Krylov basis before an explicit restart (0 = automatic).
  int max_krylov = 0;
  int max_restarts = 30;
  std::uint64_t seed = 0x1a2b3c4d5e6f7788ULL;
};

/// Top-k eigenpairs, lambda^(1) >= ... >= lambda^(k).
struct SpectralResult {
  std::shared_ptr<const LatticeDomain> domain;
  std::vector<double> eigenvalues;
  /// Column j is psi_j, unit norm, sign fixed so psi_j(X_j) > 0. Empty when vectors were not requested.
  Eigen::MatrixXd eigenvectors;
  std::vector<Site> centers;
  std::vector<double> residuals;

  std::size_t count() const noexcept { return eigenvalues.size(); }
  bool has_vectors() const noexcept { return eigenvectors.cols() > 0; }
  std::span<const double> vector(std::size_t j) const {
    return {eigenvectors.col(static_cast<Eigen::Index>(j)).data(), static_cast<std::size_t>(eigenvectors.rows())};
  }
};

/// Top-k eigenpairs. Dense (or tridiagonal) below kDenseThreshold sites, Lanczos with full
/// reorthogonalisation above. Throws ConvergenceError when Lanczos runs out of restarts.
SpectralResult top_eigs(const Hamiltonian& H, int k, const EigOptions& opts = {});

/// Every eigenvalue in decreasing order (direct solver; O(n^2) in d = 1, O(n^3) otherwise).
std::vector<double> all_eigenvalues(const Hamiltonian& H);

/// lambda^(1) only.
double principal_eigenvalue(const Hamiltonian& H);

/// argmax |psi| with lexicographic tie-break. Throws PreconditionError for the zero vector.
Site localization_center(const LatticeDomain& domain, std::span<const double> psi);

/// ||H psi - lambda psi||_2.
double residual_norm(const Hamiltonian& H, std::span<const double> psi, double lambda);

namespace detail {

struct LanczosOutput {
  std::vector<double> values;
  Eigen::MatrixXd vectors;
  double best_residual = 0.0;
};

/// Top-k pairs of H restricted to the orthogonal complement of `locked` (n x m, orthonormal).
LanczosOutput lanczos_top(const Hamiltonian& H, int k, double tol_abs, std::uint64_t seed, int max_krylov,
                          int max_restarts, const Eigen::MatrixXd& locked);

}  // namespace detail

}  // namespace topspec
