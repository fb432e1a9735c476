#include "topspec/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>

#include "topspec/error.hpp"
#include "topspec/parallel.hpp"
#include "topspec/rng.hpp"

namespace topspec {

namespace {

std::atomic<bool> g_fault{false};

constexpr double kInf = std::numeric_limits<double>::infinity();

bool holds(bool condition) { return g_fault.load() ? !condition : condition; }

CheckReport inapplicable(CheckReport r, std::string why) {
  r.status = CheckStatus::inapplicable;
  r.note = std::move(why);
  return r;
}

nlohmann::json describe(const PotentialField& field) {
  return {{"d", field.domain().dim()},
          {"sites", field.domain().size()},
          {"seed", field.seed()},
          {"rho", field.spec().rho},
          {"tail", to_string(field.spec().kind)}};
}

double json_safe(double v) { return std::isfinite(v) ? v : (v > 0 ? 1e308 : -1e308); }

}  // namespace

void set_fault_injection(bool on) noexcept { g_fault = on; }
bool fault_injection() noexcept { return g_fault.load(); }

nlohmann::json to_json(const CheckReport& r) {
  return {{"theorem", r.theorem},      {"instance", r.instance}, {"lhs", json_safe(r.lhs)},
          {"rhs", json_safe(r.rhs)},   {"margin", json_safe(r.margin())},
          {"status", to_string(r.status)}, {"note", r.note},     {"detail", r.detail}};
}

CheckReport check_truncation(const PotentialField& field, int R, double A, const LatticeDomain& U) {
  CheckReport rep;
  rep.theorem = "truncation";
  rep.instance = describe(field);
  rep.instance["R"] = R;
  rep.instance["A"] = A;
  rep.instance["U_sites"] = U.size();
  const auto& D = field.domain();
  const double eps = epsilon_R(D.dim(), A, R);
  rep.rhs = eps;
  if (eps > A / 2.0) return inapplicable(rep, "epsilon_R > A/2");
  if (!U.is_subset_of(D)) return inapplicable(rep, "U is not a subset of D");

  const Hamiltonian H = assemble(field);
  const auto specD = all_eigenvalues(H);
  const double l1 = specD.front();
  const auto region = large_field_region(field, R, A, l1);
  if (!region.is_subset_of(U)) return inapplicable(rep, "D_{R,A} is not a subset of U");
  const auto specU = U.empty() ? std::vector<double>{} : all_eigenvalues(restrict_to(H, std::make_shared<const LatticeDomain>(U)));

  double worst = 0.0;
  int eligible = 0;
  for (std::size_t k = 0; k < specD.size() && specD[k] >= l1 - A / 2.0; ++k) {
    ++eligible;
    const double diff = k < specU.size() ? std::abs(specD[k] - specU[k]) : kInf;
    worst = std::max(worst, diff);
  }
  rep.lhs = worst;
  rep.detail["eligible"] = eligible;
  rep.detail["lambda1"] = l1;
  rep.status = holds(worst <= eps + 1e-9) ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

LatticeDomain l2_bound_region(const PotentialField& field, double lambda, double A, double A_prime, int R) {
  const auto& D = field.domain();
  std::vector<Site> high;
  for (std::size_t i = 0; i < D.size(); ++i)
    if (field[i] >= lambda - A) high.push_back(D[i]);
  const LatticeDomain H(D.dim(), high);
  std::vector<Site> out;
  for (std::size_t i = 0; i < D.size(); ++i) {
    if (field[i] > lambda - A_prime) continue;
    if (!H.empty() && l1_distance(D[i], H) < R) continue;
    out.push_back(D[i]);
  }
  return LatticeDomain(D.dim(), std::move(out));
}

CheckReport check_l2_bound(const PotentialField& field, std::span<const double> psi, double lambda, double A,
                           double A_prime, int R, const LatticeDomain& D_prime) {
  CheckReport rep;
  rep.theorem = "l2_bound";
  rep.instance = describe(field);
  rep.instance["A"] = A;
  rep.instance["A_prime"] = A_prime;
  rep.instance["R"] = R;
  rep.instance["D_prime_sites"] = D_prime.size();
  const auto& D = field.domain();
  const int d = D.dim();
  if (!(A > 0.0) || A_prime < A || R < 1) return inapplicable(rep, "needs A' >= A > 0 and R >= 1");
  if (!D_prime.is_subset_of(D)) return inapplicable(rep, "D' is not a subset of D");
  std::vector<Site> high;
  for (std::size_t i = 0; i < D.size(); ++i)
    if (field[i] >= lambda - A) high.push_back(D[i]);
  const LatticeDomain Hs(d, high);
  for (const auto& s : D_prime) {
    if (field.at(s) > lambda - A_prime) return inapplicable(rep, "xi > lambda - A' on D'");
    if (!Hs.empty() && l1_distance(s, Hs) < R) return inapplicable(rep, "a high site lies within R of D'");
  }
  double norm2 = 0.0, part = 0.0;
  for (std::size_t i = 0; i < D.size(); ++i) norm2 += psi[i] * psi[i];
  for (const auto& s : D_prime) {
    const double v = psi[*D.index_of(s)];
    part += v * v;
  }
  rep.lhs = part;
  rep.rhs = std::pow(1.0 + A / (2.0 * d), 2.0 - 2.0 * R) * std::pow(1.0 + A_prime / (2.0 * d), -2.0) * norm2;
  rep.status = holds(rep.lhs <= rep.rhs * (1.0 + 1e-9) + 1e-15) ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

CheckReport check_martingale(const PotentialField& field, std::span<const double> psi, double lambda,
                             const Site& start, const MartingaleOptions& opts) {
  CheckReport rep;
  rep.theorem = "martingale";
  rep.instance = describe(field);
  rep.instance["n_paths"] = opts.n_paths;
  rep.instance["horizon"] = opts.horizon;
  rep.instance["mc_seed"] = opts.seed;
  rep.detail["statistical"] = true;
  const auto& D = field.domain();
  const int d = D.dim();
  const auto start_idx = D.index_of(start);
  const double psi0 = start_idx ? psi[*start_idx] : 0.0;
  const auto H = static_cast<std::size_t>(opts.horizon) + 1;

  constexpr std::size_t kBlocks = 64;
  std::vector<std::vector<double>> s1(kBlocks, std::vector<double>(H, 0.0)), s2 = s1;
  if (start_idx) {
    parallel_for(kBlocks, opts.threads, [&](std::size_t b) {
      auto& a1 = s1[b];
      auto& a2 = s2[b];
      for (std::size_t p = b; p < opts.n_paths; p += kBlocks) {
        CounterRng rng(derive_seed(opts.seed, p));
        std::int64_t y = static_cast<std::int64_t>(*start_idx);
        double weight = 1.0;
        bool stopped = false;
        double frozen = 0.0;
        for (std::size_t n = 0; n < H; ++n) {
          double m;
          if (stopped) {
            m = frozen;
          } else if (y < 0) {
            stopped = true;
            frozen = m = 0.0;
          } else {
            const auto yi = static_cast<std::size_t>(y);
            m = psi[yi] * weight;
            if (field[yi] >= lambda) {
              stopped = true;
              frozen = m;
            } else {
              weight *= 2.0 * d / (2.0 * d + lambda - field[yi]);
              y = D.neighbor(yi, static_cast<int>(rng() % static_cast<std::uint64_t>(2 * d)));
            }
          }
          a1[n] += m;
          a2[n] += m * m;
        }
      }
    });
  }
  std::vector<double> z(H, 0.0), mean(H, 0.0);
  int over3 = 0;
  double worst = 0.0;
  const double N = static_cast<double>(opts.n_paths);
  for (std::size_t n = 0; n < H; ++n) {
    double t1 = 0.0, t2 = 0.0;
    for (std::size_t b = 0; b < kBlocks; ++b) {
      t1 += s1[b][n];
      t2 += s2[b][n];
    }
    const double mu = N > 0 ? t1 / N : 0.0;
    const double var = N > 1 ? std::max(0.0, (t2 - N * mu * mu) / (N - 1.0)) : 0.0;
    const double se = std::sqrt(var / std::max(N, 1.0));
    const double diff = mu - psi0;
    double zn;
    if (se > 0.0)
      zn = diff / se;
    else
      zn = std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(psi0)) ? 0.0 : kInf;
    mean[n] = mu;
    z[n] = json_safe(zn);
    if (std::abs(zn) > 3.0) ++over3;
    worst = std::max(worst, std::abs(zn));
  }
  rep.lhs = worst;
  rep.rhs = 4.0;
  rep.detail["z"] = z;
  rep.detail["mean"] = mean;
  rep.detail["psi_start"] = psi0;
  rep.detail["over3"] = over3;
  rep.status = holds(worst < 4.0) ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

double path_condition_h(const PotentialField& field, double lambda, int R) {
  const auto& D = field.domain();
  const int d = D.dim();
  std::vector<double> t(D.size());
  for (std::size_t i = 0; i < D.size(); ++i)
    t[i] = field[i] < lambda ? std::log(2.0 * d / (2.0 * d + lambda - field[i])) : -kInf;
  double best = -kInf;
  std::vector<std::int32_t> path;
  path.reserve(static_cast<std::size_t>(R));
  auto dfs = [&](auto&& self, std::int32_t at, double acc) -> void {
    if (static_cast<int>(path.size()) == R) {
      best = std::max(best, acc);
      return;
    }
    for (int dir = 0; dir < 2 * d; ++dir) {
      const auto nb = D.neighbor(static_cast<std::size_t>(at), dir);
      if (nb == LatticeDomain::kNone || !std::isfinite(t[static_cast<std::size_t>(nb)])) continue;
      if (std::find(path.begin(), path.end(), nb) != path.end()) continue;
      path.push_back(nb);
      self(self, nb, acc + t[static_cast<std::size_t>(nb)]);
      path.pop_back();
    }
  };
  for (std::size_t i = 0; i < D.size(); ++i) {
    if (!std::isfinite(t[i])) continue;
    path.assign(1, static_cast<std::int32_t>(i));
    dfs(dfs, static_cast<std::int32_t>(i), t[i]);
  }
  return std::isfinite(best) ? -best / R : kInf;
}

double walk_condition_h(const PotentialField& field, double lambda, int R) {
  const auto& D = field.domain();
  const int d = D.dim();
  const std::size_t n = D.size();
  std::vector<double> t(n), cur(n), nxt(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = field[i] < lambda ? std::log(2.0 * d / (2.0 * d + lambda - field[i])) : -kInf;
  cur = t;
  for (int step = 1; step < R; ++step) {
    for (std::size_t i = 0; i < n; ++i) {
      double m = -kInf;
      if (std::isfinite(t[i]))
        for (int dir = 0; dir < 2 * d; ++dir) {
          const auto nb = D.neighbor(i, dir);
          if (nb != LatticeDomain::kNone) m = std::max(m, cur[static_cast<std::size_t>(nb)]);
        }
      nxt[i] = std::isfinite(m) ? m + t[i] : -kInf;
    }
    std::swap(cur, nxt);
  }
  const double best = *std::max_element(cur.begin(), cur.end());
  return std::isfinite(best) ? -best / R : kInf;
}

CheckReport check_decay_theorem(const PotentialField& field, const SpectralResult& spectral, int k, int R, double A,
                                const DecayOptions& opts) {
  CheckReport rep;
  rep.theorem = "decay";
  rep.instance = describe(field);
  rep.instance["k"] = k;
  rep.instance["R"] = R;
  rep.instance["A"] = A;
  rep.instance["delta"] = opts.delta;
  const auto& D = field.domain();
  const int d = D.dim();
  if (k < 1 || static_cast<std::size_t>(k) > spectral.count() || !spectral.has_vectors())
    throw PreconditionError("check_decay_theorem: eigenpair k not available");
  if (!(opts.delta > 0.0 && opts.delta < 1.0)) return inapplicable(rep, "delta outside (0,1)");
  const double eps = epsilon_R(d, A, R);
  rep.detail["epsilon_R"] = eps;
  if (!(eps < A / 2.0)) return inapplicable(rep, "epsilon_R >= A/2");

  const Hamiltonian H = assemble(field);
  std::vector<double> spec;
  if (D.size() <= kDenseThreshold) {
    spec = all_eigenvalues(H);
  } else {
    EigOptions o;
    o.want_vectors = false;
    spec = top_eigs(H, std::min<int>(k + 1, static_cast<int>(D.size())), o).eigenvalues;
  }
  const double lambda = spec[static_cast<std::size_t>(k - 1)];
  const double l1 = spec.front();
  if (lambda < l1 - A / 2.0 + eps) return inapplicable(rep, "lambda below lambda1 - A/2 + epsilon_R");
  double gap = kInf;
  if (k >= 2) gap = std::min(gap, spec[static_cast<std::size_t>(k - 2)] - lambda);
  if (static_cast<std::size_t>(k) < spec.size()) gap = std::min(gap, lambda - spec[static_cast<std::size_t>(k)]);
  rep.detail["gap"] = json_safe(gap);
  if (!(gap > 10.0 * eps)) return inapplicable(rep, "clause 1: gap <= 10 epsilon_R");

  double h = opts.h;
  const bool exhaustive = R <= opts.max_exhaustive_R;
  if (std::isnan(h)) {
    h = exhaustive ? path_condition_h(field, lambda, R) : walk_condition_h(field, lambda, R);
    h = std::isfinite(h) ? h * (1.0 - 1e-12) : 50.0;
  } else if (exhaustive) {
    if (h > path_condition_h(field, lambda, R)) return inapplicable(rep, "clause 2: path product exceeds e^{-hR}");
  } else if (h > walk_condition_h(field, lambda, R)) {
    rep.status = CheckStatus::indeterminate;
    rep.note = "clause 2: walk bound inconclusive beyond exhaustive range";
    return rep;
  }
  rep.detail["h"] = h;
  if (!(h > 0.0)) return inapplicable(rep, "clause 2: h <= 0");

  RegionDecomposition dec;
  dec.base = field.domain_ptr();
  dec.R = R;
  dec.A = A;
  dec.lambda1 = l1;
  dec.region = large_field_region(field, R, A, l1);
  dec.components = connected_components(dec.region);
  const double left = std::min((gap - 2.0 * eps) / (8.0 * d), 1.0);
  const double delta = opts.delta;
  for (const auto& C : dec.components) {
    const double right =
        4.0 * std::exp(-(1.0 - delta) * h * R + delta * h) * std::sqrt(static_cast<double>(boundary(C).size()));
    if (!(left > right)) return inapplicable(rep, "clause 3: component boundary term too large");
  }
  rep.detail["components"] = dec.components.size();

  const auto cd = contracted_distance(dec);
  const auto psi = spectral.vector(static_cast<std::size_t>(k - 1));
  double best = kInf;
  int best_c = -1;
  for (std::size_t c = 0; c < dec.components.size(); ++c) {
    double worst = -kInf;
    for (std::size_t i = 0; i < D.size(); ++i) {
      const int dist = cd(c, i);
      const double bound = dist == ContractedDistance::kInfinity ? 0.0 : std::exp(-delta * h * dist);
      worst = std::max(worst, std::abs(psi[i]) - bound);
    }
    if (worst < best) {
      best = worst;
      best_c = static_cast<int>(c);
    }
  }
  rep.lhs = best;
  rep.rhs = 0.0;
  rep.detail["component"] = best_c;
  rep.status = holds(best <= opts.slack) ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

CheckReport check_gap_to_eigenvalue_coupling(const PotentialField& field, std::vector<double> box_eigenvalues,
                                             int R, double A) {
  CheckReport rep;
  rep.theorem = "coupling";
  rep.instance = describe(field);
  rep.instance["R"] = R;
  rep.instance["A"] = A;
  rep.detail["statistical"] = true;
  const int d = field.domain().dim();
  rep.rhs = 4.0 * d * std::pow(1.0 + A / (2.0 * d), 1.0 - 2.0 * R);
  if (box_eigenvalues.empty()) {
    rep.note = "no complete box";
    return rep;
  }
  std::sort(box_eigenvalues.begin(), box_eigenvalues.end(), std::greater<>());
  int K = 0;
  while (static_cast<std::size_t>(K) < box_eigenvalues.size() && box_eigenvalues[0] - box_eigenvalues[K] < A) ++K;
  K = std::min<int>(K, static_cast<int>(field.domain().size()));
  EigOptions o;
  o.want_vectors = false;
  const auto top = top_eigs(assemble(field), K, o).eigenvalues;
  double worst = 0.0;
  std::vector<double> diffs;
  for (int j = 0; j < K; ++j) {
    const double diff = std::abs(top[static_cast<std::size_t>(j)] - box_eigenvalues[static_cast<std::size_t>(j)]);
    diffs.push_back(diff);
    worst = std::max(worst, diff);
  }
  rep.lhs = worst;
  rep.detail["eligible"] = K;
  rep.detail["diffs"] = diffs;
  rep.status = holds(worst < rep.rhs) ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

}  // namespace topspec
