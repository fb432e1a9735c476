#include "topspec/campaign.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>

#include "topspec/bounds.hpp"
#include "topspec/error.hpp"
#include "topspec/evt.hpp"
#include "topspec/parallel.hpp"
#include "topspec/rng.hpp"
#include "topspec/serialize.hpp"

namespace topspec {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const std::vector<std::pair<Campaign, std::string>>& names() {
  static const std::vector<std::pair<Campaign, std::string>> n{
      {Campaign::truncation, "truncation"}, {Campaign::l2, "l2"},
      {Campaign::gap, "gap"},               {Campaign::inclusion, "inclusion"},
      {Campaign::gap_mass, "gap_mass"},     {Campaign::confinement, "confinement"},
      {Campaign::decay, "decay"},           {Campaign::martingale, "martingale"}};
  return n;
}

int uniform_int(CounterRng& rng, int lo, int hi) {
  return lo + static_cast<int>(rng() % static_cast<std::uint64_t>(hi - lo + 1));
}

double uniform(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double pick_rho(CounterRng& rng) {
  static const double rhos[] = {0.5, 1.0, 2.0};
  return rhos[rng() % 3];
}

/// An interval (d = 1) or a w x h box (d = 2) with min_sites <= size <= max_sites.
std::shared_ptr<const LatticeDomain> random_shape(CounterRng& rng, int d, int min_sites, int max_sites) {
  if (d == 1) {
    const int n = uniform_int(rng, min_sites, max_sites);
    return std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{n - 1}));
  }
  const int root = static_cast<int>(std::sqrt(static_cast<double>(max_sites)));
  int w, h;
  do {
    w = uniform_int(rng, 1, root);
    h = uniform_int(rng, 1, max_sites / w);
  } while (w * h < min_sites);
  return std::make_shared<const LatticeDomain>(lattice_box(Site{0, 0}, Site{w - 1, h - 1}));
}

Site random_site(CounterRng& rng, const LatticeDomain& D) {
  return D[static_cast<std::size_t>(rng() % D.size())];
}

/// Generic, near-optimal or two-peak field on C; the variational campaigns draw from this mix.
PotentialField variational_field(CounterRng& rng, std::shared_ptr<const LatticeDomain> C, double rho,
                                 std::uint64_t fseed, std::string& kind) {
  const auto choice = rng() % 3;
  if (choice == 0 || C->size() < 2) {
    kind = "iid";
    return sample(C, TailSpec::exact(rho), fseed).shifted(uniform(rng, -3.0, 3.0));
  }
  if (choice == 1) {
    kind = "near_optimal";
    const auto base = sample(C, TailSpec::exact(rho), fseed);
    const auto top = top_eigs(assemble(base), 1);
    const auto psi = top.vector(0);
    std::vector<double> v(C->size());
    const double noise = std::pow(10.0, uniform(rng, -6.0, 0.0));
    const double shift = uniform(rng, -2.0, 2.0);
    for (std::size_t i = 0; i < v.size(); ++i)
      v[i] = std::max(rho * std::log(psi[i] * psi[i]), -50.0 * rho) + shift + noise * uniform(rng, -1.0, 1.0);
    return PotentialField(C, std::move(v), TailSpec::exact(rho), fseed);
  }
  kind = "two_peak";
  const Site p = random_site(rng, *C);
  Site q = random_site(rng, *C);
  for (int t = 0; t < 8 && q == p; ++t) q = random_site(rng, *C);
  const double top = uniform(rng, 0.0, 8.0);
  return planted_field(C, uniform(rng, -6.0, -2.0), 1.0, {{p, top}, {q, top - uniform(rng, 0.0, 0.3)}}, fseed);
}

CheckReport from_implication(const std::string& theorem, const ImplicationResult& r) {
  CheckReport rep;
  rep.theorem = theorem;
  rep.lhs = r.lhs;
  rep.rhs = r.rhs;
  rep.status = r.status;
  rep.note = r.note;
  rep.detail["premise"] = r.premise;
  return rep;
}

class ChiPool {
 public:
  ChiCache& operator()(double rho) {
    std::lock_guard lock(mu_);
    auto& slot = caches_[rho];
    if (!slot) slot = std::make_unique<ChiCache>(rho);
    return *slot;
  }

 private:
  std::mutex mu_;
  std::map<double, std::unique_ptr<ChiCache>> caches_;
};

ChiPool& chi_pool() {
  static ChiPool pool;
  return pool;
}

int minimal_R(int d, double A) {
  int R = 1;
  while (epsilon_R(d, A, R) > A / 2.0) ++R;
  return R;
}

CheckReport truncation_instance(CounterRng& rng, std::uint64_t fseed, const CampaignOptions& opts,
                                nlohmann::json& inst) {
  const int d = rng.uniform() < 0.5 ? 1 : 2;
  auto D = random_shape(rng, d, 20, 400);
  const double rho = pick_rho(rng);
  const bool planted = rng.uniform() < 0.5;
  PotentialField field = sample(D, TailSpec::exact(rho), fseed);
  if (planted) {
    std::vector<std::pair<Site, double>> peaks;
    const int n = uniform_int(rng, 1, 3);
    for (int j = 0; j < n; ++j) peaks.emplace_back(random_site(rng, *D), uniform(rng, 2.0, 12.0));
    field = planted_field(D, uniform(rng, -8.0, -4.0), 1.0, peaks, fseed);
  }
  double A = uniform(rng, 1.0, 8.0);
  int R = minimal_R(d, A) + uniform_int(rng, 0, 2);
  if (opts.A) A = *opts.A;
  if (opts.R) R = *opts.R;
  const double l1 = principal_eigenvalue(assemble(field));
  LatticeDomain U = large_field_region(field, R, A, l1);
  const bool grow = rng.uniform() < 0.5;
  if (grow) U = set_union(U, ball(random_site(rng, *D), uniform_int(rng, 0, 3), D.get()));
  inst = {{"field", planted ? "planted" : "iid"}, {"U", grow ? "region_plus_ball" : "region"}};
  auto rep = check_truncation(field, R, A, U);
  if (rep.falsified()) rep.instance["witness"] = to_json(field);
  return rep;
}

CheckReport l2_instance(CounterRng& rng, std::uint64_t fseed, nlohmann::json& inst) {
  const int d = rng.uniform() < 0.5 ? 1 : 2;
  auto D = random_shape(rng, d, 5, 50);
  const double rho = pick_rho(rng);
  PotentialField field = rng.uniform() < 0.5
                             ? sample(D, TailSpec::exact(rho), fseed)
                             : planted_field(D, uniform(rng, -8.0, -3.0), 1.0,
                                             {{random_site(rng, *D), uniform(rng, 2.0, 12.0)}}, fseed);
  const int k = uniform_int(rng, 1, std::min<int>(3, static_cast<int>(D->size())));
  const auto res = top_eigs(assemble(field), k);
  const double A = uniform(rng, 0.5, 6.0);
  const double Ap = A + uniform(rng, 0.0, 3.0);
  const int R = uniform_int(rng, 1, 4);
  const double lambda = res.eigenvalues[static_cast<std::size_t>(k - 1)];
  const auto Dp = l2_bound_region(field, lambda, A, Ap, R);
  inst = {{"k", k}, {"D_prime_sites", Dp.size()}};
  auto rep = check_l2_bound(field, res.vector(static_cast<std::size_t>(k - 1)), lambda, A, Ap, R, Dp);
  if (rep.falsified()) rep.instance["witness"] = to_json(field);
  return rep;
}

CheckReport gap_instance(CounterRng& rng, std::uint64_t fseed, nlohmann::json& inst) {
  const int d = rng.uniform() < 0.5 ? 1 : 2;
  auto C = random_shape(rng, d, 2, 50);
  const double rho = pick_rho(rng);
  std::string kind;
  const auto field = variational_field(rng, C, rho, fseed, kind);
  const double chi = chi_pool()(rho).chi(*C);
  const auto [l1, l2] = top_two(*C, field.values());
  const double K = (l1 - l2) * uniform(rng, 0.5, 1.5);
  inst = {{"d", d}, {"sites", C->size()}, {"rho", rho}, {"field", kind}, {"K", K}, {"chi_C", chi}};
  auto rep = from_implication("gap", gap_implication_check(*C, field.values(), rho, K, chi));
  if (rep.falsified()) rep.instance["witness"] = to_json(field);
  return rep;
}

CheckReport inclusion_instance(CounterRng& rng, std::uint64_t fseed, nlohmann::json& inst) {
  const int d = rng.uniform() < 0.5 ? 1 : 2;
  auto C = random_shape(rng, d, 1, 20);
  const double rho = pick_rho(rng);
  std::string kind;
  const auto field = variational_field(rng, C, rho, fseed, kind);
  const double chi = chi_pool()(rho).chi(*C);
  const double l1 = principal_eigenvalue(*C, field.values());
  const double A0 = 2.0 * d * (std::sqrt(5.0) - 1.0);
  const double A = rng.uniform() < 0.2 ? kInf : std::max(chi, A0) + uniform(rng, 0.0, 8.0);
  const double a = l1 - uniform(rng, -0.5, 2.0);
  inst = {{"d", d}, {"sites", C->size()}, {"rho", rho}, {"field", kind}, {"a", a}, {"chi_C", chi}};
  inst["A"] = std::isfinite(A) ? nlohmann::json(A) : nlohmann::json("inf");
  auto rep = from_implication("inclusion", inclusion_check(*C, field.values(), rho, a, A, chi));
  if (rep.falsified()) rep.instance["witness"] = to_json(field);
  return rep;
}

CheckReport gap_mass_instance(CounterRng& rng, std::uint64_t fseed, nlohmann::json& inst) {
  const int d = rng.uniform() < 0.5 ? 1 : 2;
  auto C = random_shape(rng, d, 2, 20);
  const double rho = pick_rho(rng);
  std::string kind;
  const auto field = variational_field(rng, C, rho, fseed, kind);
  const double chi = chi_pool()(rho).chi(*C);
  const double l1 = principal_eigenvalue(*C, field.values());
  const double ap = l1 - uniform(rng, 0.0, 0.5);
  const double a = ap - uniform(rng, -0.5, 1.5);
  const double A =
      std::max({chi + std::max(a - ap, 0.0), 4.0 * d, 2.0 * rho * std::log(2.0)}) + uniform(rng, 0.0, 6.0);
  inst = {{"d", d}, {"sites", C->size()}, {"rho", rho}, {"field", kind},
          {"a", a}, {"a_prime", ap},      {"A", A},     {"chi_C", chi}};
  auto rep = from_implication("gap_mass", gap_mass_check(*C, field.values(), rho, a, ap, A, chi));
  if (rep.falsified()) rep.instance["witness"] = to_json(field);
  return rep;
}

CheckReport confinement_instance(CounterRng& rng, std::uint64_t fseed, nlohmann::json& inst) {
  const int d = 1;
  auto C = random_shape(rng, d, 1, 12);
  const double rho = pick_rho(rng);
  const double A0 = confinement_A0(d);
  const double delta_max = std::asinh(0.5 * std::exp(-2.0 * (d + A0) / rho));
  const double delta = std::min(std::pow(10.0, uniform(rng, -4.5, -3.5)), delta_max * uniform(rng, 0.5, 1.0));
  const double A = 4.0 * d * (2.0 * d / (rho * delta) - 1.0) * uniform(rng, 1.0, 1.5);
  int r = 1;
  const double Ap0 = confinement_A_prime(rho, delta);
  while (2.0 * d * std::pow(1.0 + (Ap0 - d) / (2.0 * d), 1.0 - 2.0 * r) > 0.5 * rho * delta) ++r;
  r += uniform_int(rng, 0, 3);
  const auto sol = solve_chi(C, rho);
  const double Ap = confinement_A_prime(rho, delta);
  const double tail = 2.0 * d * std::pow(1.0 + (Ap - d) / (2.0 * d), 1.0 - 2.0 * r);
  const double eps = uniform(rng, std::min(tail * 1.5, rho * delta), rho * delta);
  std::vector<double> xi(C->size());
  const double noise = std::pow(10.0, uniform(rng, -9.0, -6.0));
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = sol.optimizer.values[i] + noise * uniform(rng, -1.0, 1.0);
  const double a = -sol.chi - eps;
  const auto res = confinement_check(*C, xi, rho, a, A, delta, r, sol.chi);
  inst = {{"d", d}, {"sites", C->size()}, {"rho", rho}, {"delta", delta}, {"A", A}, {"r", r}, {"a", a}};
  CheckReport rep;
  rep.theorem = "confinement";
  rep.status = res.status;
  rep.note = res.note;
  rep.lhs = res.S_diameter;
  rep.rhs = res.diameter_bound;
  rep.detail = {{"premise", res.premise}, {"S_size", res.S_size}, {"c", res.c}};
  if (rep.falsified())
    rep.instance["witness"] = to_json(PotentialField(C, xi, TailSpec::exact(rho), fseed));
  return rep;
}

CheckReport decay_instance(CounterRng& rng, std::uint64_t fseed, nlohmann::json& inst) {
  const int d = rng.uniform() < 0.8 ? 1 : 2;
  std::shared_ptr<const LatticeDomain> D;
  if (d == 1) {
    D = std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{uniform_int(rng, 50, 400) - 1}));
  } else {
    D = std::make_shared<const LatticeDomain>(
        lattice_box(Site{0, 0}, Site{uniform_int(rng, 8, 20) - 1, uniform_int(rng, 8, 20) - 1}));
  }
  std::vector<std::pair<Site, double>> peaks{{random_site(rng, *D), 12.0}};
  if (rng.uniform() < 0.3) peaks.emplace_back(random_site(rng, *D), uniform(rng, 0.0, 8.0));
  const auto field = planted_field(D, -6.0, 1.0, peaks, fseed);
  const auto res = top_eigs(assemble(field), 1);
  inst = {{"peaks", peaks.size()}};
  auto rep = check_decay_theorem(field, res, 1, 3, 3.0);
  if (rep.falsified()) rep.instance["witness"] = to_json(field);
  return rep;
}

CheckReport martingale_instance(std::uint64_t fseed, std::size_t index, const CampaignOptions& opts,
                                nlohmann::json& inst) {
  auto D = std::make_shared<const LatticeDomain>(lattice_box(Site{0}, Site{19}));
  const auto field = sample(D, TailSpec::exact(1.0), fseed);
  const auto res = top_eigs(assemble(field), 1);
  MartingaleOptions mo;
  mo.n_paths = opts.martingale_paths;
  mo.horizon = opts.martingale_horizon;
  mo.seed = derive_seed(fseed, 0x6d617274ULL);
  Site start = res.centers[0];
  if (index % 2 == 1) {
    CounterRng rng(derive_seed(fseed, 0x7374617274ULL));
    start = (*D)[static_cast<std::size_t>(rng() % D->size())];
  }
  inst = {{"start", start[0]}, {"start_is_center", start == res.centers[0]}};
  return check_martingale(field, res.vector(0), res.eigenvalues[0], start, mo);
}

}  // namespace

std::string to_string(Campaign c) {
  for (const auto& [k, v] : names())
    if (k == c) return v;
  return "?";
}

Campaign campaign_from_string(const std::string& name) {
  for (const auto& [k, v] : names())
    if (v == name) return k;
  throw PreconditionError("unknown campaign '" + name + "'");
}

const std::vector<Campaign>& all_campaigns() {
  static const std::vector<Campaign> all = [] {
    std::vector<Campaign> v;
    for (const auto& [k, name] : names()) v.push_back(k);
    return v;
  }();
  return all;
}

bool deterministic(Campaign c) { return c != Campaign::martingale; }

nlohmann::json CampaignResult::summary() const {
  return {{"campaign", to_string(campaign)}, {"instances", reports.size()},
          {"attempts", attempts},            {"pass", pass},
          {"fail", fail},                    {"inapplicable", inapplicable},
          {"indeterminate", indeterminate},  {"falsified", falsified},
          {"min_margin", min_margin},        {"seconds", seconds}};
}

PotentialField planted_field(std::shared_ptr<const LatticeDomain> D, double background, double spread,
                             const std::vector<std::pair<Site, double>>& peaks, std::uint64_t seed) {
  std::vector<double> v(D->size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    CounterRng rng(site_stream_key(seed, (*D)[i]));
    v[i] = background + spread * (2.0 * rng.uniform() - 1.0);
  }
  for (const auto& [s, h] : peaks) {
    const auto i = D->index_of(s);
    if (!i) throw DomainError("planted_field: peak outside the domain");
    v[*i] = h;
  }
  return PotentialField(std::move(D), std::move(v), TailSpec::exact(1.0), seed);
}

CheckReport campaign_instance(Campaign c, std::uint64_t seed, std::size_t index, const CampaignOptions& opts) {
  const std::uint64_t iseed = derive_seed(seed, index);
  CounterRng rng(iseed);
  const std::uint64_t fseed = derive_seed(iseed, 0x6669656c64ULL);
  nlohmann::json inst;
  CheckReport rep;
  switch (c) {
    case Campaign::truncation: rep = truncation_instance(rng, fseed, opts, inst); break;
    case Campaign::l2: rep = l2_instance(rng, fseed, inst); break;
    case Campaign::gap: rep = gap_instance(rng, fseed, inst); break;
    case Campaign::inclusion: rep = inclusion_instance(rng, fseed, inst); break;
    case Campaign::gap_mass: rep = gap_mass_instance(rng, fseed, inst); break;
    case Campaign::confinement: rep = confinement_instance(rng, fseed, inst); break;
    case Campaign::decay: rep = decay_instance(rng, fseed, inst); break;
    case Campaign::martingale: rep = martingale_instance(fseed, index, opts, inst); break;
  }
  inst.update(rep.instance);
  inst["campaign"] = to_string(c);
  inst["campaign_seed"] = seed;
  inst["index"] = index;
  rep.instance = std::move(inst);
  return rep;
}

CampaignResult run_campaign(Campaign c, const CampaignOptions& opts, const std::function<void(std::size_t)>& progress) {
  const auto t0 = std::chrono::steady_clock::now();
  CampaignResult out;
  out.campaign = c;
  std::atomic<std::size_t> done{0};
  std::mutex progress_mu;
  auto run = [&](std::size_t first, std::size_t count) {
    std::vector<CheckReport> batch(count);
    parallel_for(count, opts.threads, [&](std::size_t j) {
      batch[j] = campaign_instance(c, opts.seed, first + j, opts);
      const auto n = ++done;
      if (progress) {
        std::lock_guard lock(progress_mu);
        progress(n);
      }
    });
    return batch;
  };
  if (c == Campaign::decay) {
    const std::size_t cap = opts.max_attempts ? opts.max_attempts : 20 * opts.instances;
    std::size_t admissible = 0;
    while (admissible < opts.instances && out.attempts < cap) {
      const std::size_t count = std::min(cap - out.attempts, std::max<std::size_t>(64, opts.instances - admissible));
      for (auto& r : run(out.attempts, count)) {
        if (admissible >= opts.instances) break;
        ++out.attempts;
        if (r.status != CheckStatus::inapplicable) ++admissible;
        out.reports.push_back(std::move(r));
      }
    }
  } else {
    out.reports = run(0, opts.instances);
    out.attempts = opts.instances;
  }
  out.min_margin = kInf;
  for (const auto& r : out.reports) {
    switch (r.status) {
      case CheckStatus::pass: ++out.pass; break;
      case CheckStatus::fail: ++out.fail; break;
      case CheckStatus::inapplicable: ++out.inapplicable; break;
      case CheckStatus::indeterminate: ++out.indeterminate; break;
    }
    if (r.falsified()) ++out.falsified;
    const bool decided = r.status == CheckStatus::pass || r.status == CheckStatus::fail;
    if (decided && r.detail.value("premise", true)) out.min_margin = std::min(out.min_margin, r.margin());
  }
  if (!std::isfinite(out.min_margin)) out.min_margin = 0.0;
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

CouplingEnsemble coupling_ensemble(const TailSpec& spec, int L, int d, int N, int R, double A, std::size_t ensemble,
                                   std::uint64_t seed, unsigned threads) {
  const auto shape = ContinuumShape::unit_box(d);
  PlanOverrides ov;
  ov.N = N;
  ov.R = R;
  const auto plan = make_plan(shape, L, ov);
  auto D = std::make_shared<const LatticeDomain>(scale_domain(shape, L));
  CouplingEnsemble out;
  out.reports.resize(ensemble);
  parallel_for(ensemble, threads, [&](std::size_t i) {
    const auto field = sample(D, spec, derive_seed(seed, i));
    auto rep = check_gap_to_eigenvalue_coupling(field, box_eigenvalues(field, plan), R, A);
    rep.instance["index"] = i;
    out.reports[i] = std::move(rep);
  });
  for (const auto& r : out.reports) out.holds += r.status == CheckStatus::pass;
  out.fraction = ensemble ? static_cast<double>(out.holds) / static_cast<double>(ensemble) : 1.0;
  return out;
}

}  // namespace topspec
