#include "topspec/variational.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "topspec/bounds.hpp"
#include "topspec/error.hpp"
#include "topspec/hamiltonian.hpp"
#include "topspec/rng.hpp"
#include "topspec/spectrum.hpp"

namespace topspec {

namespace {

constexpr double kClamp = -50.0;

Hamiltonian operator_on(const LatticeDomain& C, std::span<const double> phi) {
  if (phi.size() != C.size()) throw DomainError("profile/support size mismatch");
  std::vector<double> diag(phi.begin(), phi.end());
  for (auto& v : diag) v -= 2.0 * C.dim();
  return Hamiltonian(std::make_shared<const LatticeDomain>(C), std::move(diag));
}

struct Eigenpair {
  double value;
  Eigen::VectorXd vector;
};

Eigenpair principal_pair(const Hamiltonian& H) {
  EigOptions o;
  o.multiplicity_check = false;
  auto r = top_eigs(H, 1, o);
  return {r.eigenvalues[0], r.eigenvectors.col(0)};
}

void normalize_profile(std::vector<double>& phi, double rho) {
  const double shift = rho * log_ell(phi, rho);
  for (auto& v : phi) v = std::max(v - shift, kClamp * rho);
}

struct RunState {
  std::vector<double> phi;
  Eigen::VectorXd psi;
  double J = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  bool used_fallback = false;
  std::vector<double> trace;
};

double objective(const LatticeDomain& C, const std::vector<double>& phi, double rho, Eigen::VectorXd* psi) {
  auto ep = principal_pair(operator_on(C, phi));
  if (psi) *psi = std::move(ep.vector);
  return ep.value - rho * log_ell(phi, rho);
}

std::vector<double> profile_from(const Eigen::VectorXd& psi, double rho) {
  std::vector<double> phi(static_cast<std::size_t>(psi.size()));
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double p2 = psi(i) * psi(i);
    phi[static_cast<std::size_t>(i)] = p2 > 0.0 ? std::max(rho * std::log(p2), kClamp * rho) : kClamp * rho;
  }
  normalize_profile(phi, rho);
  return phi;
}

void projected_gradient(const LatticeDomain& C, double rho, const ChiOptions& opts, RunState& st) {
  st.used_fallback = true;
  double step = 1.0;
  Eigen::VectorXd psi;
  double J = objective(C, st.phi, rho, &psi);
  for (int it = 0; it < opts.max_iterations; ++it) {
    const double L = ell(st.phi, rho);
    std::vector<double> grad(st.phi.size());
    double gnorm = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      grad[i] = psi(static_cast<Eigen::Index>(i)) * psi(static_cast<Eigen::Index>(i)) - std::exp(st.phi[i] / rho) / L;
      gnorm = std::max(gnorm, std::abs(grad[i]));
    }
    bool moved = false;
    while (step > 1e-14) {
      std::vector<double> trial(st.phi);
      for (std::size_t i = 0; i < trial.size(); ++i) trial[i] += step * rho * grad[i];
      normalize_profile(trial, rho);
      Eigen::VectorXd tpsi;
      const double tJ = objective(C, trial, rho, &tpsi);
      if (tJ >= J) {
        const double gain = tJ - J;
        st.phi = std::move(trial);
        psi = std::move(tpsi);
        J = tJ;
        step *= 1.5;
        moved = true;
        st.trace.push_back(J);
        if (gain < opts.tol) st.converged = true;
        break;
      }
      step *= 0.5;
    }
    ++st.iterations;
    if (!moved || st.converged || gnorm < 1e-12) {
      st.converged = true;
      break;
    }
  }
  st.J = J;
  st.psi = psi;
}

// Anderson-accelerated fixed point phi <- rho log psi^2. An accelerated step is taken only when it beats the
// plain step's objective, so J is nondecreasing and the fixed point is the same.
RunState run_fixed_point(const LatticeDomain& C, double rho, std::vector<double> phi0, const ChiOptions& opts) {
  constexpr int kDepth = 5;
  RunState st;
  st.phi = std::move(phi0);
  normalize_profile(st.phi, rho);
  st.J = objective(C, st.phi, rho, &st.psi);
  st.trace.push_back(st.J);
  const auto n = static_cast<Eigen::Index>(st.phi.size());
  auto as_vec = [n](const std::vector<double>& v) { return Eigen::Map<const Eigen::VectorXd>(v.data(), n); };
  std::deque<Eigen::VectorXd> xs, gs;
  for (int it = 0; it < opts.max_iterations; ++it) {
    std::vector<double> next = profile_from(st.psi, rho);
    Eigen::VectorXd psi;
    double J = objective(C, next, rho, &psi);
    int damped = 0;
    for (; damped < 40 && J < st.J; ++damped) {
      for (std::size_t i = 0; i < next.size(); ++i) next[i] = 0.5 * (next[i] + st.phi[i]);
      normalize_profile(next, rho);
      J = objective(C, next, rho, &psi);
    }
    ++st.iterations;
    if (J < st.J) break;
    if (damped == 0) {
      xs.push_back(as_vec(st.phi));
      gs.push_back(as_vec(next));
      if (xs.size() > kDepth + 1) {
        xs.pop_front();
        gs.pop_front();
      }
      const auto m = static_cast<Eigen::Index>(xs.size()) - 1;
      if (m >= 1) {
        Eigen::MatrixXd dF(n, m), dG(n, m);
        for (Eigen::Index j = 0; j < m; ++j) {
          const auto uj = static_cast<std::size_t>(j);
          dF.col(j) = (gs[uj + 1] - xs[uj + 1]) - (gs[uj] - xs[uj]);
          dG.col(j) = gs[uj + 1] - gs[uj];
        }
        const Eigen::VectorXd f = gs.back() - xs.back();
        const Eigen::VectorXd gamma = dF.colPivHouseholderQr().solve(f);
        if (gamma.allFinite()) {
          const Eigen::VectorXd x = gs.back() - dG * gamma;
          std::vector<double> trial(x.data(), x.data() + n);
          normalize_profile(trial, rho);
          Eigen::VectorXd tpsi;
          const double tJ = objective(C, trial, rho, &tpsi);
          if (tJ > J) {
            next = std::move(trial);
            psi = std::move(tpsi);
            J = tJ;
          }
        }
      }
    } else {
      xs.clear();
      gs.clear();
    }
    const double change = J - st.J;
    st.phi = std::move(next);
    st.psi = std::move(psi);
    st.J = J;
    st.trace.push_back(J);
    if (change < opts.tol) {
      st.converged = true;
      return st;
    }
  }
  projected_gradient(C, rho, opts, st);
  return st;
}

std::size_t center_index(const LatticeDomain& C) {
  std::vector<double> mean(static_cast<std::size_t>(C.dim()), 0.0);
  for (const auto& s : C)
    for (int a = 0; a < C.dim(); ++a) mean[static_cast<std::size_t>(a)] += s[a];
  for (auto& m : mean) m /= static_cast<double>(C.size());
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < C.size(); ++i) {
    double dist = 0.0;
    for (int a = 0; a < C.dim(); ++a) dist += std::abs(C[i][a] - mean[static_cast<std::size_t>(a)]);
    if (dist < best_d - 1e-12) {
      best_d = dist;
      best = i;
    }
  }
  return best;
}

}  // namespace

double log_ell(std::span<const double> phi, double rho) {
  if (phi.empty()) return -std::numeric_limits<double>::infinity();
  const double m = *std::max_element(phi.begin(), phi.end()) / rho;
  double acc = 0.0;
  for (double v : phi) acc += std::exp(v / rho - m);
  return m + std::log(acc);
}

double ell(std::span<const double> phi, double rho) { return std::exp(log_ell(phi, rho)); }

double ell_truncated(std::span<const double> phi, double rho, double A) {
  if (A < 0.0) throw PreconditionError("ell_truncated: A must be >= 0");
  std::vector<double> kept;
  for (double v : phi)
    if (v >= -2.0 * A) kept.push_back(v);
  return kept.empty() ? 0.0 : ell(kept, rho);
}

double principal_eigenvalue(const LatticeDomain& C, std::span<const double> phi) {
  return principal_pair(operator_on(C, phi)).value;
}

std::pair<double, double> top_two(const LatticeDomain& C, std::span<const double> phi) {
  const auto H = operator_on(C, phi);
  if (H.size() == 1) return {H.diagonal()[0], -std::numeric_limits<double>::infinity()};
  const auto all = all_eigenvalues(H);
  return {all[0], all[1]};
}

ChiSolution solve_chi(std::shared_ptr<const LatticeDomain> C, double rho, const ChiOptions& opts) {
  if (!C || C->empty()) throw PreconditionError("solve_chi: C must be nonempty");
  if (!(rho > 0.0)) throw PreconditionError("solve_chi: rho must be > 0");
  const std::size_t n = C->size();

  std::vector<std::pair<std::string, std::vector<double>>> starts;
  {
    std::vector<double> delta(n, kClamp * rho);
    delta[center_index(*C)] = 0.0;
    starts.emplace_back("delta", std::move(delta));
  }
  if (opts.warm_start.size() == n) starts.emplace_back("warm", opts.warm_start);
  if (n > 1) {
    CounterRng rng(derive_seed(opts.seed, n));
    for (int s = 0; s < opts.random_starts; ++s) {
      std::vector<double> phi(n);
      for (auto& v : phi) v = -3.0 * rho * rng.uniform();
      starts.emplace_back("random" + std::to_string(s), std::move(phi));
    }
  }

  ChiSolution best;
  RunState winner;
  bool have = false;
  bool any_converged = false;
  for (auto& [name, phi0] : starts) {
    RunState st = run_fixed_point(*C, rho, phi0, opts);
    best.runs.push_back({name, -st.J, st.iterations, st.converged, st.used_fallback});
    any_converged = any_converged || st.converged;
    if (!have || st.J > winner.J) {
      winner = std::move(st);
      have = true;
    }
  }
  if (!any_converged)
    throw ConvergenceError("solve_chi: no start converged", std::abs(winner.trace.size() > 1
                                                                        ? winner.trace.back() - winner.trace[winner.trace.size() - 2]
                                                                        : 0.0));

  best.chi = -winner.J;
  best.optimizer = {C, winner.phi};
  best.eigvec = winner.psi;
  if (best.eigvec.sum() < 0) best.eigvec = -best.eigvec;
  best.iterations = winner.iterations;
  best.used_fallback = winner.used_fallback;
  best.trace = std::move(winner.trace);
  double kkt = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = best.eigvec(static_cast<Eigen::Index>(i));
    kkt = std::max(kkt, std::abs(std::exp(winner.phi[i] / rho) - p * p));
  }
  best.kkt_residual = kkt;
  return best;
}

std::vector<ChiSolution> chi_balls(double rho, int d, int max_n, double stop_tol) {
  std::vector<ChiSolution> out;
  std::shared_ptr<const LatticeDomain> prev;
  for (int n = 0; n <= max_n; ++n) {
    auto C = std::make_shared<const LatticeDomain>(ball(Site::origin(d), n));
    ChiOptions opts;
    opts.random_starts = 1;
    if (prev) {
      opts.warm_start.assign(C->size(), kClamp * rho);
      const auto& phi = out.back().optimizer.values;
      for (std::size_t i = 0; i < prev->size(); ++i) opts.warm_start[*C->index_of((*prev)[i])] = phi[i];
    }
    out.push_back(solve_chi(C, rho, opts));
    prev = C;
    if (n >= 1 && stop_tol > 0.0 && out[out.size() - 2].chi - out.back().chi < stop_tol) break;
  }
  return out;
}

ChiInfinite chi_infinite(double rho, int d, double tol, int max_n) {
  ChiInfinite out;
  const auto sols = chi_balls(rho, d, max_n, tol);
  for (std::size_t n = 0; n < sols.size(); ++n) {
    out.radii.push_back(static_cast<int>(n));
    out.values.push_back(sols[n].chi);
  }
  const double drop = sols.size() >= 2 ? out.values[sols.size() - 2] - out.values.back() : std::numeric_limits<double>::infinity();
  if (!(drop < tol)) throw ConvergenceError("chi_infinite: radius budget exceeded", sols.size() >= 2 ? drop : 0.0);
  out.chi = out.values.back();
  out.error = std::max(drop, 0.0);
  return out;
}

double ChiCache::chi(const LatticeDomain& C) {
  std::vector<int> key{C.dim()};
  std::array<int, kMaxDim> lo{};
  lo.fill(std::numeric_limits<int>::max());
  for (const auto& s : C)
    for (int a = 0; a < C.dim(); ++a) lo[static_cast<std::size_t>(a)] = std::min(lo[static_cast<std::size_t>(a)], s[a]);
  for (const auto& s : C)
    for (int a = 0; a < C.dim(); ++a) key.push_back(s[a] - lo[static_cast<std::size_t>(a)]);
  {
    std::lock_guard lk(mu_);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  }
  const double v = solve_chi(std::make_shared<const LatticeDomain>(C), rho_, opts_).chi;
  std::lock_guard lk(mu_);
  memo_.emplace(std::move(key), v);
  return v;
}

std::string to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::inapplicable: return "inapplicable";
    case CheckStatus::indeterminate: return "indeterminate";
  }
  return "unknown";
}

ImplicationResult gap_implication_check(const LatticeDomain& C, std::span<const double> xi, double rho, double K,
                                        double chi_C, double slack) {
  ImplicationResult r;
  if (C.size() < 2) {
    r.status = CheckStatus::inapplicable;
    r.note = "|C| < 2";
    return r;
  }
  const auto [l1, l2] = top_two(C, xi);
  r.premise = l1 - l2 <= K;
  r.lhs = l1 - rho * log_ell(xi, rho);
  r.rhs = -chi_C + K - rho * std::log(2.0);
  r.status = !r.premise || r.lhs <= r.rhs + slack ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

ImplicationResult inclusion_check(const LatticeDomain& C, std::span<const double> xi, double rho, double a, double A,
                                  double chi_C, double slack) {
  ImplicationResult r;
  const int d = C.dim();
  const bool infinite = std::isinf(A);
  if (!infinite && (A < chi_C || A * (1.0 + A / (4.0 * d)) < 4.0 * d)) {
    r.status = CheckStatus::inapplicable;
    r.note = "needs A >= chi_C and A(1 + A/4d) >= 4d";
    return r;
  }
  const double l1 = principal_eigenvalue(C, xi);
  r.premise = l1 >= a;
  std::vector<double> phi(xi.begin(), xi.end());
  for (auto& v : phi) v -= a + chi_C;
  if (infinite) {
    r.lhs = 0.0;
    r.rhs = log_ell(phi, rho);
  } else {
    const double Lt = ell_truncated(phi, rho, A);
    r.lhs = -eta(d, A) / rho;
    r.rhs = Lt > 0.0 ? std::log(Lt) : -std::numeric_limits<double>::infinity();
  }
  r.status = !r.premise || r.lhs <= r.rhs + slack ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

ImplicationResult gap_mass_check(const LatticeDomain& C, std::span<const double> xi, double rho, double a,
                                 double a_prime, double A, double chi_C, double slack) {
  ImplicationResult r;
  const int d = C.dim();
  if (A < chi_C + std::max(0.0, a - a_prime) || A * (1.0 + A / (4.0 * d)) < 8.0 * d ||
      0.5 * rho * std::log(2.0) > A / 4.0) {
    r.status = CheckStatus::inapplicable;
    r.note = "needs A >= chi_C + (a - a')_+, A(1 + A/4d) >= 8d, rho log 2 / 2 <= A/4";
    return r;
  }
  const auto [l1, l2] = top_two(C, xi);
  r.premise = l1 >= a_prime && l1 - l2 <= 0.5 * rho * std::log(2.0);
  std::vector<double> phi(xi.begin(), xi.end());
  std::size_t kept = 0;
  for (auto& v : phi) {
    v -= a + chi_C;
    if (v >= -2.0 * A) ++kept;
  }
  if (r.premise && kept < 2) {
    r.status = CheckStatus::inapplicable;
    r.note = "fewer than two sites with phi >= -2A";
    return r;
  }
  const double Lt = ell_truncated(phi, rho, A);
  r.lhs = (a_prime - a - eta(d, A)) / rho + 0.5 * std::log(2.0);
  r.rhs = Lt > 0.0 ? std::log(Lt) : -std::numeric_limits<double>::infinity();
  r.status = !r.premise || r.lhs <= r.rhs + slack ? CheckStatus::pass : CheckStatus::fail;
  return r;
}

double confinement_A0(int d) {
  // A0^2 / 4d + A0 - 4d = 0.
  const double q = 1.0 / (4.0 * d);
  return (-1.0 + std::sqrt(1.0 + 16.0 * d * q)) / (2.0 * q);
}

double confinement_A_prime(double rho, double delta) { return -0.5 * rho * std::log(2.0 * std::sinh(delta)); }

ConfinementResult confinement_check(const LatticeDomain& C, std::span<const double> xi, double rho, double a,
                                    double A, double delta, int r, double chi_C) {
  ConfinementResult out;
  const int d = C.dim();
  const double Ap = confinement_A_prime(rho, delta);
  out.c = 2.0 * std::exp(delta + 2.0 * A / rho);
  if (!(delta > 0.0) || r < 1 || !(A >= Ap) || !(Ap >= d + confinement_A0(d)) || eta(d, A) / rho > delta) {
    out.status = CheckStatus::inapplicable;
    out.note = "needs A >= A' >= d + A0, eta(A)/rho <= delta, r >= 1";
    return out;
  }
  std::vector<double> phi(xi.begin(), xi.end());
  for (auto& v : phi) v -= a + chi_C;
  const double l1 = principal_eigenvalue(C, xi);
  const double threshold = a + 2.0 * d * std::pow(1.0 + (Ap - d) / (2.0 * d), 1.0 - 2.0 * r);
  out.premise = ell_truncated(phi, rho, A) <= std::exp(delta) && l1 >= threshold;
  std::vector<Site> S;
  for (std::size_t i = 0; i < C.size(); ++i)
    if (phi[i] > -2.0 * Ap) S.push_back(C[i]);
  out.S_size = S.size();
  out.S_diameter = LatticeDomain(C.dim(), S).diameter();
  out.diameter_bound = 2.0 * static_cast<double>(S.size()) * r;
  out.status = !out.premise || out.S_diameter <= out.diameter_bound ? CheckStatus::pass : CheckStatus::fail;
  return out;
}

}  // namespace topspec
