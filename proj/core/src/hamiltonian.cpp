#include "topspec/hamiltonian.hpp"

#include <algorithm>
#include <cmath>

#include "topspec/error.hpp"

namespace topspec {

Hamiltonian::Hamiltonian(std::shared_ptr<const LatticeDomain> domain, std::vector<double> diagonal)
    : domain_(std::move(domain)), diag_(std::move(diagonal)) {
  if (!domain_) throw DomainError("hamiltonian: null domain");
  if (diag_.size() != domain_->size()) throw DomainError("hamiltonian: diagonal/domain size mismatch");
}

void Hamiltonian::apply(std::span<const double> x, std::span<double> y) const {
  const auto& D = *domain_;
  const int nd = 2 * D.dim();
  const std::size_t n = diag_.size();
  for (std::size_t i = 0; i < n; ++i) {
    double acc = diag_[i] * x[i];
    for (int dir = 0; dir < nd; ++dir) {
      const auto j = D.neighbor(i, dir);
      if (j != LatticeDomain::kNone) acc += x[static_cast<std::size_t>(j)];
    }
    y[i] = acc;
  }
}

Eigen::VectorXd Hamiltonian::apply(const Eigen::VectorXd& x) const {
  Eigen::VectorXd y(x.size());
  apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
        std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
  return y;
}

Eigen::MatrixXd Hamiltonian::dense() const {
  const auto n = static_cast<Eigen::Index>(diag_.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  const auto& D = *domain_;
  for (Eigen::Index i = 0; i < n; ++i) {
    M(i, i) = diag_[static_cast<std::size_t>(i)];
    for (int dir = 0; dir < 2 * D.dim(); ++dir) {
      const auto j = D.neighbor(static_cast<std::size_t>(i), dir);
      if (j != LatticeDomain::kNone) M(i, j) = 1.0;
    }
  }
  return M;
}

double Hamiltonian::inf_norm() const {
  double best = 0.0;
  for (std::size_t i = 0; i < diag_.size(); ++i)
    best = std::max(best, std::abs(diag_[i]) + domain_->degree(i));
  return best;
}

Eigen::VectorXd Hamiltonian::subdiagonal() const {
  const auto n = static_cast<Eigen::Index>(diag_.size());
  Eigen::VectorXd sub = Eigen::VectorXd::Zero(std::max<Eigen::Index>(n - 1, 0));
  for (Eigen::Index i = 0; i + 1 < n; ++i)
    sub(i) = domain_->neighbor(static_cast<std::size_t>(i), 1) == i + 1 ? 1.0 : 0.0;
  return sub;
}

Hamiltonian assemble(const PotentialField& field) {
  const int d = field.domain().dim();
  std::vector<double> diag(field.values().begin(), field.values().end());
  for (auto& v : diag) v -= 2.0 * d;
  return Hamiltonian(field.domain_ptr(), std::move(diag));
}

Hamiltonian assemble(const LatticeDomain& domain, const PotentialField& field) {
  if (!(field.domain() == domain)) throw DomainError("field/domain mismatch");
  return assemble(field);
}

Hamiltonian rank_one_deform(const Hamiltonian& H, const LatticeDomain& U, double s) {
  if (!U.is_subset_of(H.domain())) throw DomainError("rank_one_deform: U is not a subset of D");
  std::vector<double> diag(H.diagonal().begin(), H.diagonal().end());
  if (s != 0.0)
    for (std::size_t i = 0; i < diag.size(); ++i)
      if (!U.contains(H.domain()[i])) diag[i] -= s;
  return Hamiltonian(H.domain_ptr(), std::move(diag));
}

Hamiltonian restrict_to(const Hamiltonian& H, std::shared_ptr<const LatticeDomain> U) {
  if (!U->is_subset_of(H.domain())) throw DomainError("restrict_to: U is not a subset of D");
  std::vector<double> diag;
  diag.reserve(U->size());
  for (const auto& s : *U) diag.push_back(H.diagonal()[*H.domain().index_of(s)]);
  return Hamiltonian(std::move(U), std::move(diag));
}

}  // namespace topspec
