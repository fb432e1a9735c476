#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "topspec/field.hpp"
#include "topspec/lattice.hpp"

namespace topspec {

/// H_{D,xi} = Delta + xi with Dirichlet conditions outside D.
///
/// Row x carries xi(x) - 2d on the diagonal and +1 for each neighbour inside D;
/// neighbours outside D only contribute through the -2d term.
class Hamiltonian {
 public:
  Hamiltonian(std::shared_ptr<const LatticeDomain> domain, std::vector<double> diagonal);

  const LatticeDomain& domain() const noexcept { return *domain_; }
  const std::shared_ptr<const LatticeDomain>& domain_ptr() const noexcept { return domain_; }
  std::size_t size() const noexcept { return diag_.size(); }
  std::span<const double> diagonal() const noexcept { return diag_; }

  /// y = H x.
  void apply(std::span<const double> x, std::span<double> y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd dense() const;
  /// max_x sum_y |H(x,y)|.
  double inf_norm() const;
  /// True when the lexicographic basis makes H tridiagonal (d = 1).
  bool tridiagonal() const noexcept { return domain_->dim() == 1; }
  /// Off-diagonal entries H(i, i+1) in the tridiagonal case (0 across gaps).
  Eigen::VectorXd subdiagonal() const;

 private:
  std::shared_ptr<const LatticeDomain> domain_;
  std::vector<double> diag_;
};

/// Assembles H over the field's own domain.
Hamiltonian assemble(const PotentialField& field);
/// Assembles H over `domain`; throws DomainError unless the field lives on exactly that domain.
Hamiltonian assemble(const LatticeDomain& domain, const PotentialField& field);

/// H with s subtracted from the diagonal on D \ U (the field xi - s 1_{D\U}).
Hamiltonian rank_one_deform(const Hamiltonian& H, const LatticeDomain& U, double s);

/// H_{U,xi} for U a subset of D (Dirichlet restriction).
Hamiltonian restrict_to(const Hamiltonian& H, std::shared_ptr<const LatticeDomain> U);

}  // namespace topspec
