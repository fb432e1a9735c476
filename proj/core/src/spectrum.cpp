#include "topspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <lapacke.h>

#include "topspec/error.hpp"

namespace topspec {

namespace {

// Top-k eigenpairs of a symmetric tridiagonal matrix: bisection for the values, inverse
// iteration (with reorthogonalisation inside clusters) for the vectors.
void tridiagonal_top(const Hamiltonian& H, int k, bool want_vectors, std::vector<double>& values,
                     Eigen::MatrixXd& vectors) {
  const auto n = static_cast<lapack_int>(H.size());
  std::vector<double> d(H.diagonal().begin(), H.diagonal().end());
  Eigen::VectorXd sub = H.subdiagonal();
  std::vector<double> e(sub.data(), sub.data() + sub.size());
  if (e.empty()) e.push_back(0.0);

  lapack_int m = 0, nsplit = 0;
  std::vector<double> w(static_cast<std::size_t>(n));
  std::vector<lapack_int> iblock(static_cast<std::size_t>(n)), isplit(static_cast<std::size_t>(n));
  const double abstol = 2.0 * LAPACKE_dlamch('S');
  lapack_int info = LAPACKE_dstebz('I', 'B', n, 0.0, 0.0, n - k + 1, n, abstol, d.data(), e.data(), &m, &nsplit,
                                   w.data(), iblock.data(), isplit.data());
  if (info != 0 || m != k) throw ConvergenceError("tridiagonal bisection failed (info " + std::to_string(info) + ")", 0.0);

  values.assign(static_cast<std::size_t>(k), 0.0);
  if (!want_vectors) {
    // 'B' orders by block; sort globally.
    std::vector<double> tmp(w.begin(), w.begin() + m);
    std::sort(tmp.begin(), tmp.end(), std::greater<>());
    values = tmp;
    return;
  }
  std::vector<double> z(static_cast<std::size_t>(n) * static_cast<std::size_t>(m));
  std::vector<lapack_int> ifail(static_cast<std::size_t>(m));
  info = LAPACKE_dstein(LAPACK_COL_MAJOR, n, d.data(), e.data(), m, w.data(), iblock.data(), isplit.data(), z.data(),
                        n, ifail.data());
  if (info != 0) throw ConvergenceError("tridiagonal inverse iteration failed to converge", 0.0);
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return w[static_cast<std::size_t>(a)] > w[static_cast<std::size_t>(b)]; });
  vectors.resize(n, m);
  for (int j = 0; j < m; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    values[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(src)];
    vectors.col(j) = Eigen::Map<const Eigen::VectorXd>(z.data() + static_cast<std::size_t>(src) * static_cast<std::size_t>(n), n);
  }
}

// Top-k eigenpairs of a dense symmetric matrix by LAPACK MRRR, restricted to the index range n-k+1..n.
void dense_top(const Hamiltonian& H, int k, bool want_vectors, std::vector<double>& values,
               Eigen::MatrixXd& vectors) {
  Eigen::MatrixXd A = H.dense();
  const auto n = static_cast<lapack_int>(H.size());
  lapack_int m = 0;
  std::vector<double> w(static_cast<std::size_t>(n));
  Eigen::MatrixXd Z(want_vectors ? n : 1, want_vectors ? k : 1);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(std::max(k, 1)));
  const lapack_int info =
      LAPACKE_dsyevr(LAPACK_COL_MAJOR, want_vectors ? 'V' : 'N', 'I', 'U', n, A.data(), n, 0.0, 0.0, n - k + 1, n,
                     0.0, &m, w.data(), Z.data(), static_cast<lapack_int>(Z.rows()), isuppz.data());
  if (info != 0 || m != k) throw ConvergenceError("dense eigensolver failed (info " + std::to_string(info) + ")", 0.0);
  values.resize(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j) values[static_cast<std::size_t>(j)] = w[static_cast<std::size_t>(k - 1 - j)];
  if (want_vectors) {
    vectors.resize(n, k);
    for (int j = 0; j < k; ++j) vectors.col(j) = Z.col(k - 1 - j);
  }
}

}  // namespace

double residual_norm(const Hamiltonian& H, std::span<const double> psi, double lambda) {
  std::vector<double> y(psi.size());
  H.apply(psi, y);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = y[i] - lambda * psi[i];
    acc += r * r;
  }
  return std::sqrt(acc);
}

Site localization_center(const LatticeDomain& domain, std::span<const double> psi) {
  if (psi.size() != domain.size()) throw DomainError("localization_center: vector/domain size mismatch");
  std::size_t best = 0;
  double best_abs = -1.0;
  // Sites are in lexicographic order, so strict '>' keeps the smallest site among ties.
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double a = std::abs(psi[i]);
    if (a > best_abs) {
      best_abs = a;
      best = i;
    }
  }
  if (!(best_abs > 0.0)) throw PreconditionError("localization_center: zero vector");
  return domain[best];
}

SpectralResult top_eigs(const Hamiltonian& H, int k, const EigOptions& opts) {
  const auto n = H.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) throw PreconditionError("top_eigs: need 1 <= k <= |D|");
  SpectralResult out;
  out.domain = H.domain_ptr();

  SolverKind kind = opts.solver;
  if (kind == SolverKind::automatic)
    kind = n <= kDenseThreshold || H.tridiagonal() ? SolverKind::dense : SolverKind::lanczos;

  Eigen::MatrixXd vecs;
  const double tol_abs = opts.tol * std::max(1.0, H.inf_norm());
  if (kind == SolverKind::dense) {
    if (H.tridiagonal())
      tridiagonal_top(H, k, opts.want_vectors, out.eigenvalues, vecs);
    else
      dense_top(H, k, opts.want_vectors, out.eigenvalues, vecs);
  } else {
    Eigen::MatrixXd none(static_cast<Eigen::Index>(n), 0);
    auto res = detail::lanczos_top(H, k, tol_abs, opts.seed, opts.max_krylov, opts.max_restarts, none);
    if (opts.multiplicity_check && static_cast<std::size_t>(k) < n) {
      Eigen::MatrixXd locked = res.vectors;
      std::uint64_t probe_seed = opts.seed;
      for (int guard = 0; guard < k; ++guard) {
        probe_seed = probe_seed * 6364136223846793005ULL + 1442695040888963407ULL;
        if (static_cast<std::size_t>(locked.cols()) >= n) break;
        auto extra = detail::lanczos_top(H, 1, tol_abs, probe_seed, opts.max_krylov, opts.max_restarts, locked);
        if (extra.values.empty() || extra.values[0] <= res.values.back() + 10.0 * tol_abs) break;
        // A repeated eigenvalue the first Krylov space missed: insert it, drop the lowest.
        locked.conservativeResize(Eigen::NoChange, locked.cols() + 1);
        locked.col(locked.cols() - 1) = extra.vectors.col(0);
        res.values.push_back(extra.values[0]);
        res.vectors.conservativeResize(Eigen::NoChange, res.vectors.cols() + 1);
        res.vectors.col(res.vectors.cols() - 1) = extra.vectors.col(0);
        std::vector<int> order(res.values.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
          return res.values[static_cast<std::size_t>(a)] > res.values[static_cast<std::size_t>(b)];
        });
        std::vector<double> v2;
        Eigen::MatrixXd m2(static_cast<Eigen::Index>(n), k);
        for (int j = 0; j < k; ++j) {
          v2.push_back(res.values[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
          m2.col(j) = res.vectors.col(order[static_cast<std::size_t>(j)]);
        }
        res.values = std::move(v2);
        res.vectors = std::move(m2);
      }
    }
    out.eigenvalues = std::move(res.values);
    vecs = std::move(res.vectors);
  }

  if (opts.want_vectors) {
    for (int j = 0; j < k; ++j) {
      auto col = vecs.col(j);
      col.normalize();
      std::span<const double> psi(col.data(), n);
      out.centers.push_back(localization_center(H.domain(), psi));
      const auto c = *H.domain().index_of(out.centers.back());
      if (col(static_cast<Eigen::Index>(c)) < 0) col = -col;
      out.residuals.push_back(residual_norm(H, psi, out.eigenvalues[static_cast<std::size_t>(j)]));
    }
    out.eigenvectors = std::move(vecs);
  }
  return out;
}

std::vector<double> all_eigenvalues(const Hamiltonian& H) {
  std::vector<double> values;
  const auto n = H.size();
  if (n == 0) return values;
  if (H.tridiagonal()) {
    std::vector<double> d(H.diagonal().begin(), H.diagonal().end());
    Eigen::VectorXd sub = H.subdiagonal();
    std::vector<double> e(sub.data(), sub.data() + sub.size());
    e.push_back(0.0);
    const lapack_int info = LAPACKE_dsterf(static_cast<lapack_int>(n), d.data(), e.data());
    if (info != 0) throw ConvergenceError("dsterf failed", 0.0);
    values = std::move(d);
  } else {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.dense(), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw ConvergenceError("dense eigensolver failed", 0.0);
    values.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
  }
  std::sort(values.begin(), values.end(), std::greater<>());
  return values;
}

double principal_eigenvalue(const Hamiltonian& H) {
  EigOptions o;
  o.want_vectors = false;
  return top_eigs(H, 1, o).eigenvalues.front();
}

}  // namespace topspec
