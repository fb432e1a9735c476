#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "topspec/error.hpp"
#include "topspec/rng.hpp"
#include "topspec/spectrum.hpp"

namespace topspec::detail {

namespace {

void project_out(const Eigen::MatrixXd& Q, Eigen::Index cols, Eigen::VectorXd& w) {
  if (cols == 0) return;
  const auto B = Q.leftCols(cols);
  for (int pass = 0; pass < 2; ++pass) w.noalias() -= B * (B.transpose() * w);
}

Eigen::VectorXd random_unit(Eigen::Index n, CounterRng& rng, const Eigen::MatrixXd& P, Eigen::Index pcols) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform() - 0.5;
    project_out(P, pcols, v);
    const double nv = v.norm();
    if (nv > 1e-8) return v / nv;
  }
  return Eigen::VectorXd::Zero(n);
}

}  // namespace

LanczosOutput lanczos_top(const Hamiltonian& H, int k, double tol_abs, std::uint64_t seed, int max_krylov,
                          int max_restarts, const Eigen::MatrixXd& locked) {
  const auto n = static_cast<Eigen::Index>(H.size());
  const Eigen::Index m0 = locked.cols();
  const Eigen::Index avail = n - m0;
  if (k < 1 || k > avail) throw PreconditionError("lanczos: need 1 <= k <= n - locked");
  Eigen::Index maxk = max_krylov > 0 ? max_krylov : std::max<Eigen::Index>(2 * k + 40, 120);
  maxk = std::min(maxk, avail);

  // P holds every direction excluded from the Krylov space: caller's locked vectors, then our converged ones.
  Eigen::MatrixXd P(n, m0 + k);
  if (m0 > 0) P.leftCols(m0) = locked;
  Eigen::Index pcols = m0;
  std::vector<double> conv_vals;

  CounterRng rng(derive_seed(seed, 0x6c616e637a6f73ULL));
  Eigen::VectorXd start = random_unit(n, rng, P, pcols);
  double best_residual = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd V(n, maxk + 1);
  std::vector<double> alpha, beta;
  Eigen::VectorXd w(n);

  for (int cycle = 0; cycle <= max_restarts; ++cycle) {
    const int want = k - static_cast<int>(conv_vals.size());
    if (start.squaredNorm() == 0.0) break;
    const Eigen::Index room = std::min(maxk, n - pcols);
    V.col(0) = start;
    alpha.clear();
    beta.clear();
    Eigen::Index j = 0;
    bool breakdown = false;
    Eigen::VectorXd ritz;
    Eigen::MatrixXd S;
    std::vector<double> res;
    while (true) {
      H.apply(std::span<const double>(V.col(j).data(), static_cast<std::size_t>(n)),
              std::span<double>(w.data(), static_cast<std::size_t>(n)));
      const double a = V.col(j).dot(w);
      alpha.push_back(a);
      w -= a * V.col(j);
      if (j > 0) w -= beta.back() * V.col(j - 1);
      project_out(V, j + 1, w);
      project_out(P, pcols, w);
      const double b = w.norm();
      const Eigen::Index size = j + 1;
      breakdown = b <= 1e-12 * std::max(1.0, std::abs(a)) || size >= room;
      const bool check = breakdown || size >= maxk || size % 10 == 0;
      if (check && size >= std::min<Eigen::Index>(want, room)) {
        Eigen::VectorXd dg = Eigen::Map<Eigen::VectorXd>(alpha.data(), size);
        Eigen::VectorXd sd = size > 1 ? Eigen::VectorXd(Eigen::Map<Eigen::VectorXd>(beta.data(), size - 1))
                                      : Eigen::VectorXd();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
        es.computeFromTridiagonal(dg, sd, Eigen::ComputeEigenvectors);
        ritz = es.eigenvalues().reverse();
        S = es.eigenvectors().rowwise().reverse();
        res.assign(static_cast<std::size_t>(size), 0.0);
        const double bnext = breakdown && size < room ? 0.0 : b;
        for (Eigen::Index i = 0; i < size; ++i) res[static_cast<std::size_t>(i)] = std::abs(bnext * S(size - 1, i));
        int good = 0;
        while (good < want && good < size && res[static_cast<std::size_t>(good)] <= tol_abs) ++good;
        if (good > 0) best_residual = std::min(best_residual, res[static_cast<std::size_t>(good - 1)]);
        else best_residual = std::min(best_residual, res[0]);
        if (good == want || breakdown || size >= maxk) break;
      } else if (breakdown) {
        break;
      }
      beta.push_back(b);
      V.col(j + 1) = w / b;
      ++j;
    }

    const Eigen::Index size = static_cast<Eigen::Index>(alpha.size());
    if (ritz.size() == 0) throw ConvergenceError("lanczos: empty Krylov space", best_residual);
    const bool exact = breakdown && size < room;
    // Lock the converged prefix from the top; Ritz values below an unconverged one are not trusted.
    int lock = 0;
    while (lock < want && lock < size && (exact || res[static_cast<std::size_t>(lock)] <= tol_abs)) ++lock;
    for (int i = 0; i < lock; ++i) {
      Eigen::VectorXd y = V.leftCols(size) * S.col(i);
      project_out(P, pcols, y);
      y.normalize();
      P.col(pcols++) = y;
      conv_vals.push_back(ritz(i));
    }
    if (static_cast<int>(conv_vals.size()) == k) break;
    if (pcols >= n) break;
    if (size >= room && breakdown && !exact) {
      // The whole remaining space was spanned; everything is exact up to round-off.
    }
    // Restart from the sum of the wanted, still unconverged Ritz vectors.
    const int still = k - static_cast<int>(conv_vals.size());
    Eigen::VectorXd next = Eigen::VectorXd::Zero(n);
    for (int i = lock; i < std::min<Eigen::Index>(lock + still, size); ++i) next += V.leftCols(size) * S.col(i);
    if (exact) next = random_unit(n, rng, P, pcols);
    project_out(P, pcols, next);
    const double nn = next.norm();
    start = nn > 1e-10 ? Eigen::VectorXd(next / nn) : random_unit(n, rng, P, pcols);
  }

  if (static_cast<int>(conv_vals.size()) < k)
    throw ConvergenceError("lanczos: restart budget exhausted", best_residual);

  LanczosOutput out;
  std::vector<int> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return conv_vals[static_cast<std::size_t>(a)] > conv_vals[static_cast<std::size_t>(b)];
  });
  out.vectors.resize(n, k);
  for (int i = 0; i < k; ++i) {
    out.values.push_back(conv_vals[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
    out.vectors.col(i) = P.col(m0 + order[static_cast<std::size_t>(i)]);
  }
  out.best_residual = best_residual;
  return out;
}

}  // namespace topspec::detail
