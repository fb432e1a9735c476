#include "topspec/evt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "topspec/error.hpp"
#include "topspec/hamiltonian.hpp"
#include "topspec/parallel.hpp"
#include "topspec/rng.hpp"

namespace topspec {

namespace {

double principal_on_box(const PotentialField& field) {
  EigOptions o;
  o.want_vectors = false;
  return top_eigs(assemble(field), 1, o).eigenvalues[0];
}

}  // namespace

LatticeDomain ScalePlan::box(std::size_t i) const {
  Site hi = box_origins[i];
  for (int a = 0; a < d; ++a) hi[a] += N - 1;
  return lattice_box(box_origins[i], hi);
}

ScalePlan make_plan(const ContinuumShape& shape, int L, const PlanOverrides& overrides) {
  if (L < 3) throw PreconditionError("make_plan: L must be >= 3");
  const auto D = scale_domain(shape, L);
  const double logL = std::log(static_cast<double>(L));
  ScalePlan plan;
  plan.shape = shape;
  plan.L = L;
  plan.d = D.dim();
  plan.domain_size = D.size();
  const double ll = std::log(logL);
  plan.R = overrides.R.value_or(std::max(1, static_cast<int>(std::ceil(ll * ll))));
  plan.N = overrides.N.value_or(
      std::min(static_cast<int>(std::ceil(logL * logL * logL)), static_cast<int>(std::ceil(L / 4.0))));
  if (plan.R < 1 || plan.N < 1) throw PreconditionError("make_plan: R and N must be >= 1");
  if (!(std::log(static_cast<double>(plan.N)) / logL < 1.0))
    throw PreconditionError("make_plan: log N / log L must be < 1");
  plan.pitch = plan.N + 1;

  const int d = plan.d;
  Site lo = D[0], hi = D[0];
  for (const auto& s : D)
    for (int a = 0; a < d; ++a) {
      lo[a] = std::min(lo[a], s[a]);
      hi[a] = std::max(hi[a], s[a]);
    }
  std::vector<int> counts(static_cast<std::size_t>(d));
  for (int a = 0; a < d; ++a) counts[static_cast<std::size_t>(a)] = (hi[a] - lo[a] + 1 - plan.N) / plan.pitch + 1;
  if (std::any_of(counts.begin(), counts.end(), [](int c) { return c < 1; }))
    throw PreconditionError("make_plan: m_L < 2 (no box fits)");
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Site o = lo;
    for (int a = 0; a < d; ++a) o[a] += idx[static_cast<std::size_t>(a)] * plan.pitch;
    Site top = o;
    for (int a = 0; a < d; ++a) top[a] += plan.N - 1;
    bool inside = true;
    for (const auto& s : lattice_box(o, top))
      if (!D.contains(s)) {
        inside = false;
        break;
      }
    if (inside) plan.box_origins.push_back(o);
    int a = d - 1;
    while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == counts[static_cast<std::size_t>(a)]) {
      idx[static_cast<std::size_t>(a)] = 0;
      --a;
    }
    if (a < 0) break;
  }
  if (plan.m() < 2) throw PreconditionError("make_plan: m_L < 2");
  plan.ratios = {{"R_over_loglogL", plan.R / ll},
                 {"N_over_R", static_cast<double>(plan.N) / plan.R},
                 {"logN_over_logL", std::log(static_cast<double>(plan.N)) / logL},
                 {"m_L", plan.m()}};
  return plan;
}

std::vector<double> box_eigenvalues(const PotentialField& field, const ScalePlan& plan, unsigned threads) {
  std::vector<double> out(plan.m());
  parallel_for(plan.m(), threads, [&](std::size_t i) {
    auto box = std::make_shared<const LatticeDomain>(plan.box(i));
    if (!box->is_subset_of(field.domain())) throw DomainError("box_eigenvalues: field does not cover the box");
    out[i] = principal_on_box(field.restrict_to(box));
  });
  return out;
}

std::vector<double> sample_box_principal(const TailSpec& spec, int d, int N, std::size_t n, std::uint64_t seed,
                                         unsigned threads) {
  Site lo = Site::origin(d), hi = Site::origin(d);
  for (int a = 0; a < d; ++a) hi[a] = N - 1;
  auto box = std::make_shared<const LatticeDomain>(lattice_box(lo, hi));
  std::vector<double> out(n);
  parallel_for(n, threads, [&](std::size_t i) { out[i] = principal_on_box(sample(box, spec, derive_seed(seed, i))); });
  return out;
}

ALEstimate estimate_a_L(const TailSpec& spec, const ScalePlan& plan, std::size_t n_mc, std::uint64_t seed,
                        unsigned threads, int bootstrap) {
  ALEstimate est;
  est.target_probability = std::pow(static_cast<double>(plan.N) / plan.L, plan.d);
  est.n_mc = n_mc;
  const double need = 10.0 / est.target_probability;
  if (static_cast<double>(n_mc) < need)
    throw PreconditionError("estimate_a_L: quantile beyond Monte Carlo resolution; need n_mc >= " +
                            std::to_string(static_cast<std::size_t>(std::ceil(need))));
  est.samples = sample_box_principal(spec, plan.d, plan.N, n_mc, seed, threads);
  const double q = 1.0 - est.target_probability;
  est.a_L = stats::quantile(est.samples, q);
  est.se = stats::bootstrap_se(est.samples, [q](std::vector<double>& v) { return stats::quantile(v, q); }, bootstrap,
                               seed);
  return est;
}

std::vector<double> PointCloud::W() const {
  std::vector<double> w;
  w.reserve(heights.size());
  for (double h : heights) w.push_back(volume * std::exp(-h));
  return w;
}

PointCloud rescale(const SpectralResult& spectral, const ScalePlan& plan, double a_L, double rho) {
  if (!std::isfinite(a_L)) throw PreconditionError("rescale: a_L must be finite");
  PointCloud pc;
  pc.L = plan.L;
  pc.a_L = a_L;
  pc.rho = rho;
  pc.volume = plan.shape.volume();
  pc.domain_size = spectral.domain ? spectral.domain->size() : plan.domain_size;
  const double logD = std::log(static_cast<double>(pc.domain_size));
  for (std::size_t k = 0; k < spectral.count(); ++k) {
    pc.heights.push_back((spectral.eigenvalues[k] - a_L) * logD / rho);
    if (k < spectral.centers.size()) {
      std::vector<double> x;
      for (int a = 0; a < spectral.centers[k].dim(); ++a)
        x.push_back(spectral.centers[k][a] / static_cast<double>(plan.L));
      pc.positions.push_back(std::move(x));
    }
  }
  return pc;
}

PointCloud synthetic_cloud(const ContinuumShape& shape, int k, std::uint64_t seed) {
  PointCloud pc;
  pc.volume = shape.volume();
  CounterRng rng(derive_seed(seed, 0x706f6973ULL));
  const auto bb = shape.bounds();
  double W = 0.0;
  for (int i = 0; i < k; ++i) {
    W += -std::log(rng.open_uniform());
    pc.heights.push_back(-std::log(W / pc.volume));
    std::vector<double> x(static_cast<std::size_t>(shape.dim));
    do {
      for (int a = 0; a < shape.dim; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        x[ua] = bb.lo[ua] + (bb.hi[ua] - bb.lo[ua]) * rng.open_uniform();
      }
    } while (!shape.contains(x));
    pc.positions.push_back(x);
  }
  return pc;
}

namespace {

double poisson_pmf(int j, double mu) { return std::exp(j * std::log(mu) - mu - std::lgamma(j + 1.0)); }

// Share of each position bin (a regular grid over the bounding box) that lies in the shape.
std::vector<double> bin_fractions(const ContinuumShape& shape, int bins_per_axis, int sub = 16) {
  const int d = shape.dim;
  const auto bb = shape.bounds();
  std::size_t nb = 1, per = 1;
  for (int a = 0; a < d; ++a) {
    nb *= static_cast<std::size_t>(bins_per_axis);
    per *= static_cast<std::size_t>(sub);
  }
  std::vector<double> frac(nb, 0.0);
  std::vector<double> x(static_cast<std::size_t>(d));
  for (std::size_t b = 0; b < nb; ++b) {
    std::size_t inside = 0;
    for (std::size_t s = 0; s < per; ++s) {
      std::size_t bi = b, si = s;
      for (int a = d - 1; a >= 0; --a) {
        const auto ua = static_cast<std::size_t>(a);
        const double cell = (bb.hi[ua] - bb.lo[ua]) / bins_per_axis;
        const auto ib = bi % static_cast<std::size_t>(bins_per_axis);
        const auto is = si % static_cast<std::size_t>(sub);
        bi /= static_cast<std::size_t>(bins_per_axis);
        si /= static_cast<std::size_t>(sub);
        x[ua] = bb.lo[ua] + cell * (static_cast<double>(ib) + (static_cast<double>(is) + 0.5) / sub);
      }
      if (shape.contains(x)) ++inside;
    }
    frac[b] = static_cast<double>(inside) / static_cast<double>(per);
  }
  const double total = std::accumulate(frac.begin(), frac.end(), 0.0);
  for (auto& f : frac) f /= total;
  return frac;
}

}  // namespace

PoissonReport poisson_tests(const std::vector<PointCloud>& clouds, const ContinuumShape& shape,
                            const PoissonTestOptions& opts) {
  if (clouds.size() < 100) throw PreconditionError("poisson_tests: insufficient ensemble (need >= 100 clouds)");
  PoissonReport rep;
  rep.clouds = clouds.size();

  std::vector<std::vector<double>> Ws;
  for (const auto& c : clouds) {
    auto w = c.W();
    std::sort(w.begin(), w.end());
    Ws.push_back(std::move(w));
  }

  std::vector<double> inc;
  for (const auto& w : Ws) {
    double prev = 0.0;
    for (double v : w) {
      inc.push_back(v - prev);
      prev = v;
    }
  }
  rep.increments = stats::ks_exponential(inc);
  rep.qq_empirical = inc;
  std::sort(rep.qq_empirical.begin(), rep.qq_empirical.end());
  const double ni = static_cast<double>(inc.size());
  for (std::size_t i = 0; i < inc.size(); ++i)
    rep.qq_theoretical.push_back(-std::log1p(-(static_cast<double>(i) + 0.5) / ni));

  // Counts per window in cells 0, 1, 2, >= 3. A cloud whose last recorded point lies below the
  // window's upper edge may be missing points there and is left out of that window.
  const auto& edges = opts.windows;
  double chi2 = 0.0, dof = 0.0;
  std::size_t used = 0;
  for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
    const double lo = edges[j], hi = edges[j + 1], mu = hi - lo;
    std::vector<double> obs(4, 0.0);
    std::size_t n = 0;
    for (const auto& w : Ws) {
      if (!w.empty() && w.back() < hi) {
        ++rep.censored;
        continue;
      }
      int cnt = 0;
      for (double v : w) cnt += v >= lo && v < hi;
      obs[static_cast<std::size_t>(std::min(cnt, 3))] += 1.0;
      ++n;
    }
    std::vector<double> expected(4);
    double acc = 0.0;
    for (int q = 0; q < 3; ++q) {
      expected[static_cast<std::size_t>(q)] = static_cast<double>(n) * poisson_pmf(q, mu);
      acc += expected[static_cast<std::size_t>(q)];
    }
    expected[3] = static_cast<double>(n) - acc;
    const auto t = stats::chi_square(obs, expected);
    chi2 += t.statistic;
    dof += t.dof;
    used += n;
  }
  rep.counts.statistic = chi2;
  rep.counts.dof = dof;
  rep.counts.n = used;
  rep.counts.p_value = stats::chi_square_sf(chi2, dof);

  const int d = shape.dim;
  const int bins = d == 1 ? opts.position_bins
                          : std::max(2, static_cast<int>(std::lround(std::pow(opts.position_bins, 1.0 / d))) + 1);
  const auto frac = bin_fractions(shape, bins);
  const auto bb = shape.bounds();
  std::vector<double> obs(frac.size(), 0.0);
  double npos = 0.0;
  for (const auto& c : clouds)
    for (const auto& x : c.positions) {
      std::size_t b = 0;
      for (int a = 0; a < d; ++a) {
        const auto ua = static_cast<std::size_t>(a);
        const int ib =
            std::clamp(static_cast<int>((x[ua] - bb.lo[ua]) / (bb.hi[ua] - bb.lo[ua]) * bins), 0, bins - 1);
        b = b * static_cast<std::size_t>(bins) + static_cast<std::size_t>(ib);
      }
      obs[b] += 1.0;
      npos += 1.0;
    }
  std::vector<double> o2, e2;
  for (std::size_t b = 0; b < frac.size(); ++b)
    if (frac[b] > 0.0) {
      o2.push_back(obs[b]);
      e2.push_back(frac[b] * npos);
    }
  rep.positions = stats::chi_square(o2, e2);

  std::vector<double> xs, hs;
  for (const auto& c : clouds) {
    if (hs.size() >= opts.max_dcor_points || c.heights.empty() || c.positions.empty()) continue;
    const auto top =
        static_cast<std::size_t>(std::max_element(c.heights.begin(), c.heights.end()) - c.heights.begin());
    xs.insert(xs.end(), c.positions[top].begin(), c.positions[top].end());
    hs.push_back(c.heights[top]);
  }
  rep.independence =
      stats::dcor_permutation_test(xs, static_cast<std::size_t>(d), hs, 1, opts.permutations, opts.seed);

  const double cut = opts.level / 4.0;
  rep.all_pass = rep.increments.p_value >= cut && rep.counts.p_value >= cut && rep.positions.p_value >= cut &&
                 rep.independence.p_value >= cut;
  return rep;
}

nlohmann::json to_json(const PoissonReport& r) {
  auto t = [](const stats::TestResult& x) {
    return nlohmann::json{{"statistic", x.statistic}, {"p_value", x.p_value}, {"dof", x.dof}, {"n", x.n}};
  };
  return {{"clouds", r.clouds},
          {"censored", r.censored},
          {"increments_ks", t(r.increments)},
          {"window_counts", t(r.counts)},
          {"positions", t(r.positions)},
          {"independence_dcor", t(r.independence)},
          {"all_pass", r.all_pass}};
}

double chi_gap_statistic(const SpectralResult& spectral, const PotentialField& field) {
  if (spectral.count() == 0) throw PreconditionError("chi_gap_statistic: principal eigenvalue missing");
  return field.max_value() - spectral.eigenvalues[0];
}

double localization_mass(const SpectralResult& spectral, int k, int r) {
  if (k < 1 || static_cast<std::size_t>(k) > spectral.count() || !spectral.has_vectors())
    throw PreconditionError("localization_mass: eigenvector k not available");
  const auto& D = *spectral.domain;
  const auto psi = spectral.vector(static_cast<std::size_t>(k - 1));
  const Site& X = spectral.centers[static_cast<std::size_t>(k - 1)];
  double mass = 0.0;
  for (std::size_t i = 0; i < D.size(); ++i)
    if (l1_distance(D[i], X) <= r) mass += psi[i] * psi[i];
  return std::min(mass, 1.0);
}

namespace {

// Intercept and slope of y = b0 + b1 x.
std::pair<double, double> least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = stats::mean(x), my = stats::mean(y);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  const double b1 = sxx > 0.0 ? sxy / sxx : 0.0;
  return {my - b1 * mx, b1};
}

}  // namespace

DecayFit decay_fit(const SpectralResult& spectral, int k, double cut, double floor) {
  if (k < 1 || static_cast<std::size_t>(k) > spectral.count() || !spectral.has_vectors())
    throw PreconditionError("decay_fit: eigenvector k not available");
  const auto& D = *spectral.domain;
  const auto psi = spectral.vector(static_cast<std::size_t>(k - 1));
  const Site& X = spectral.centers[static_cast<std::size_t>(k - 1)];
  std::vector<double> xn, yn, xf, yf;
  for (std::size_t i = 0; i < D.size(); ++i) {
    const double a = std::abs(psi[i]);
    if (!(a > floor)) continue;
    const double r = l1_distance(D[i], X);
    (r < cut ? xn : xf).push_back(r);
    (r < cut ? yn : yf).push_back(std::log(a));
  }
  DecayFit fit;
  fit.n_near = xn.size();
  fit.n_far = xf.size();
  if (xn.size() >= 2) {
    const auto [b0, b1] = least_squares(xn, yn);
    fit.c1 = std::exp(b0);
    fit.c2_near = -b1;
  }
  auto distinct = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
  };
  if (distinct(xf) >= 3) {
    fit.far_available = true;
    fit.c2_far = -least_squares(xf, yf).second;
  }
  return fit;
}

std::vector<MaxOrderRow> max_order_report(const ALEstimate& est, const ScalePlan& plan, double rho,
                                          const std::vector<double>& s_values) {
  const double bL = rho / (plan.d * std::log(static_cast<double>(plan.L)));
  const double p = est.target_probability;
  const double n = static_cast<double>(est.samples.size());
  std::vector<MaxOrderRow> rows;
  for (double s : s_values) {
    const double thr = est.a_L + s * bL;
    const double hits = static_cast<double>(
        std::count_if(est.samples.begin(), est.samples.end(), [thr](double v) { return v >= thr; }));
    const double ph = hits / n;
    rows.push_back({s, ph / p, std::sqrt(ph * (1.0 - ph) / n) / p, std::exp(-s)});
  }
  return rows;
}

PartitionStability partition_stability(const TailSpec& spec, int d, int N, int R, double a, std::size_t n_mc,
                                       std::uint64_t seed, unsigned threads) {
  if (R < 1 || N <= R) throw PreconditionError("partition_stability: need 1 <= R < N");
  PartitionStability out;
  const auto big = sample_box_principal(spec, d, N, n_mc, derive_seed(seed, 1), threads);
  const auto small = sample_box_principal(spec, d, R, n_mc, derive_seed(seed, 2), threads);
  auto frac = [a](const std::vector<double>& v) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), [a](double x) { return x >= a; })) /
           static_cast<double>(v.size());
  };
  out.p_N = frac(big);
  out.p_R = frac(small);
  out.lhs = out.p_N < 1.0 ? -std::log1p(-out.p_N) : std::numeric_limits<double>::infinity();
  out.volume_ratio = std::pow(static_cast<double>(N) / R, d);
  const double base = out.volume_ratio * out.p_R;
  out.c_fit = base > 0.0 ? std::max(0.0, (1.0 - out.lhs / base) * static_cast<double>(N) / R) : 0.0;
  return out;
}

SampleRecord run_sample(std::shared_ptr<const LatticeDomain> D_L, const TailSpec& spec, int L, std::uint64_t seed,
                        const SampleOptions& opts) {
  SampleRecord rec;
  rec.seed = seed;
  rec.L = L;
  const auto field = sample(std::move(D_L), spec, seed);
  auto res = top_eigs(assemble(field), opts.k);
  rec.eigenvalues = res.eigenvalues;
  rec.centers = res.centers;
  rec.residuals = res.residuals;
  rec.max_xi = field.max_value();
  rec.chi_gap = chi_gap_statistic(res, field);
  rec.mass = localization_mass(res, 1, opts.mass_radius);
  rec.fit = decay_fit(res, 1, std::log(static_cast<double>(L)));
  if (!opts.keep_vectors) res.eigenvectors.resize(0, 0);
  rec.spectral = std::move(res);
  return rec;
}

nlohmann::json to_json(const SampleRecord& r) {
  nlohmann::json centers = nlohmann::json::array();
  for (const auto& c : r.centers) {
    std::vector<int> x;
    for (int a = 0; a < c.dim(); ++a) x.push_back(c[a]);
    centers.push_back(x);
  }
  return {{"seed", r.seed},
          {"L", r.L},
          {"eigenvalues", r.eigenvalues},
          {"centers", centers},
          {"residuals", r.residuals},
          {"max_xi", r.max_xi},
          {"chi_gap", r.chi_gap},
          {"mass", r.mass},
          {"decay",
           {{"c1", r.fit.c1},
            {"c2_near", r.fit.c2_near},
            {"c2_far", r.fit.c2_far},
            {"far_available", r.fit.far_available}}}};
}

}  // namespace topspec
