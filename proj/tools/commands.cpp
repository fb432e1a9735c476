#include "commands.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "topspec/campaign.hpp"
#include "topspec/error.hpp"
#include "topspec/evt.hpp"
#include "topspec/parallel.hpp"
#include "topspec/regions.hpp"
#include "topspec/rng.hpp"
#include "topspec/serialize.hpp"
#include "topspec/variational.hpp"

#ifndef TOPSPEC_VERSION
#define TOPSPEC_VERSION "unknown"
#endif

namespace topspec::cli {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

class Output {
 public:
  Output(const RunConfig& cfg, std::string command) : dir_(cfg.get<std::string>("out")), header_(header(command, cfg)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw ConfigError("cannot create output directory '" + dir_.string() + "': " + ec.message());
  }

  std::ofstream jsonl(const std::string& name) const {
    auto f = open(name);
    f << json{{"header", header_}}.dump() << '\n';
    return f;
  }

  std::ofstream csv(const std::string& name, const std::string& columns) const {
    auto f = open(name);
    f << "# " << header_.dump() << '\n' << columns << '\n';
    return f;
  }

 private:
  std::ofstream open(const std::string& name) const {
    std::ofstream f(dir_ / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + (dir_ / name).string() + "'");
    f << std::setprecision(17);
    return f;
  }

  fs::path dir_;
  json header_;
};

unsigned threads(const RunConfig& cfg) { return static_cast<unsigned>(cfg.get<int>("threads")); }
std::uint64_t seed(const RunConfig& cfg) { return cfg.get<std::uint64_t>("seed"); }

std::shared_ptr<const LatticeDomain> domain_for(const RunConfig& cfg, int L) {
  try {
    return std::make_shared<const LatticeDomain>(scale_domain(cfg.shape(), L));
  } catch (const DomainError& e) {
    throw ConfigError(std::string("L = ") + std::to_string(L) + ": " + e.what());
  }
}

std::uint64_t sample_seed(std::uint64_t master, int L, std::size_t i) {
  return derive_seed(derive_seed(master, static_cast<std::uint64_t>(L)), i);
}

PlanOverrides overrides(const RunConfig& cfg) {
  PlanOverrides o;
  if (cfg.get<int>("R") > 0) o.R = cfg.get<int>("R");
  if (cfg.get<int>("N") > 0) o.N = cfg.get<int>("N");
  return o;
}

ScalePlan plan_for(const RunConfig& cfg, int L) {
  try {
    return make_plan(cfg.shape(), L, overrides(cfg));
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("L = ") + std::to_string(L) + ": " + e.what());
  }
}

std::size_t n_mc_for(const RunConfig& cfg, const ScalePlan& plan) {
  if (cfg.get<int>("n_mc") > 0) return static_cast<std::size_t>(cfg.get<int>("n_mc"));
  return static_cast<std::size_t>(std::ceil(40.0 / std::pow(static_cast<double>(plan.N) / plan.L, plan.d)));
}

ALEstimate a_L_for(const RunConfig& cfg, const ScalePlan& plan) {
  try {
    return estimate_a_L(cfg.tail(), plan, n_mc_for(cfg, plan), derive_seed(seed(cfg), 0xa1000000ULL + plan.L),
                        threads(cfg), cfg.get<int>("bootstrap"));
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
}

int default_R(int L) {
  if (L < 3) return 1;
  const double ll = std::log(std::log(static_cast<double>(L)));
  return std::max(1, static_cast<int>(std::ceil(ll * ll)));
}

int cmd_spectrum(const RunConfig& cfg) {
  const Output out(cfg, "spectrum");
  const int k = cfg.get<int>("k");
  const auto Ls = cfg.Ls();
  std::vector<std::shared_ptr<const LatticeDomain>> domains;
  for (int L : Ls) {
    domains.push_back(domain_for(cfg, L));
    if (static_cast<std::size_t>(k) > domains.back()->size())
      throw ConfigError("k = " + std::to_string(k) + " exceeds |D_L| = " + std::to_string(domains.back()->size()) +
                        " at L = " + std::to_string(L));
  }
  auto jl = out.jsonl("spectrum.jsonl");
  std::string cols = "L,seed";
  for (int j = 1; j <= k; ++j) cols += ",lambda_" + std::to_string(j);
  cols += ",max_xi,chi_gap,mass,c2_near,components,untrimmed";
  auto csv = out.csv("spectrum.csv", cols);
  const auto spec = cfg.tail();
  const auto n = static_cast<std::size_t>(cfg.get<int>("ensemble"));
  const double A = cfg.get<double>("A");
  for (std::size_t li = 0; li < Ls.size(); ++li) {
    const int L = Ls[li];
    const int R = cfg.get<int>("R") > 0 ? cfg.get<int>("R") : default_R(L);
    std::optional<ScalePlan> plan;
    std::optional<ALEstimate> est;
    if (cfg.get<bool>("rescale")) {
      plan = plan_for(cfg, L);
      est = a_L_for(cfg, *plan);
    }
    std::vector<json> lines(n);
    std::vector<std::string> rows(n);
    SampleOptions so;
    so.k = k;
    so.mass_radius = cfg.get<int>("mass_radius");
    so.keep_vectors = false;
    parallel_for(n, threads(cfg), [&](std::size_t i) {
      const auto s = sample_seed(seed(cfg), L, i);
      const auto rec = run_sample(domains[li], spec, L, s, so);
      const auto field = sample(domains[li], spec, s);
      const auto dec = extract(field, R, A, rec.eigenvalues[0]);
      std::size_t untrimmed = 0;
      for (bool t : dec.trimmed) untrimmed += !t;
      json j = to_json(rec);
      j["regions"] = {{"R", R}, {"A", A}, {"components", dec.components.size()}, {"untrimmed", untrimmed}};
      if (est) {
        const auto cloud = rescale(rec.spectral, *plan, est->a_L, spec.rho);
        j["a_L"] = est->a_L;
        j["heights"] = cloud.heights;
        j["positions"] = cloud.positions;
      }
      lines[i] = std::move(j);
      std::ostringstream row;
      row << std::setprecision(17) << L << ',' << s;
      for (double v : rec.eigenvalues) row << ',' << v;
      row << ',' << rec.max_xi << ',' << rec.chi_gap << ',' << rec.mass << ',' << rec.fit.c2_near << ','
          << dec.components.size() << ',' << untrimmed;
      rows[i] = row.str();
    });
    for (const auto& j : lines) jl << j.dump() << '\n';
    for (const auto& r : rows) csv << r << '\n';
  }
  return kExitOk;
}

int cmd_verify(const RunConfig& cfg) {
  const Output out(cfg, "verify");
  std::vector<Campaign> campaigns;
  for (const auto& name : cfg.strings("campaigns")) {
    if (name == "all") {
      campaigns = all_campaigns();
      break;
    }
    campaigns.push_back(campaign_from_string(name));
  }
  CampaignOptions opts;
  opts.instances = static_cast<std::size_t>(cfg.get<int>("instances"));
  opts.seed = seed(cfg);
  opts.threads = threads(cfg);
  opts.martingale_paths = static_cast<std::size_t>(cfg.get<int>("paths"));
  opts.martingale_horizon = cfg.get<int>("horizon");
  if (cfg.get<int>("R") > 0) {
    opts.R = cfg.get<int>("R");
    opts.A = cfg.get<double>("A");
  }
  auto jl = out.jsonl("verify.jsonl");
  auto csv = out.csv("verify_summary.csv",
                     "campaign,instances,attempts,pass,fail,inapplicable,indeterminate,falsified,min_margin");
  std::size_t falsified = 0;
  for (auto c : campaigns) {
    const auto res = run_campaign(c, opts);
    for (const auto& r : res.reports) jl << to_json(r).dump() << '\n';
    csv << to_string(c) << ',' << res.reports.size() << ',' << res.attempts << ',' << res.pass << ',' << res.fail << ','
        << res.inapplicable << ',' << res.indeterminate << ',' << res.falsified << ',' << res.min_margin << '\n';
    std::cerr << to_string(c) << ": " << res.pass << " pass, " << res.fail << " fail, " << res.inapplicable
              << " inapplicable, " << res.indeterminate << " indeterminate (" << std::fixed << std::setprecision(1)
              << res.seconds << " s)\n"
              << std::defaultfloat;
    if (res.inapplicable == res.reports.size() && !res.reports.empty())
      std::cerr << "warning: every " << to_string(c) << " instance was inapplicable\n";
    falsified += res.falsified;
    for (const auto& r : res.reports)
      if (r.falsified()) std::cerr << "FALSIFYING WITNESS: " << to_json(r).dump() << '\n';
  }
  return falsified ? kExitFalsified : kExitOk;
}

int cmd_chi(const RunConfig& cfg) {
  const Output out(cfg, "chi");
  auto csv = out.csv("chi.csv", "rho,d,n,sites,chi,iterations,kkt_residual,used_fallback");
  auto jl = out.jsonl("chi.jsonl");
  const double tol = cfg.get<double>("tol");
  for (double rho : cfg.doubles("rhos"))
    for (int d : cfg.ints("dims")) {
      const auto sols = chi_balls(rho, d, cfg.get<int>("max_n"));
      for (std::size_t n = 0; n < sols.size(); ++n)
        csv << rho << ',' << d << ',' << n << ',' << sols[n].optimizer.support->size() << ',' << sols[n].chi << ','
            << sols[n].iterations << ',' << sols[n].kkt_residual << ',' << sols[n].used_fallback << '\n';
      const double drop = sols.size() >= 2 ? sols[sols.size() - 2].chi - sols.back().chi : 0.0;
      json trace = json::array();
      for (const auto& s : sols) trace.push_back(s.chi);
      jl << json{{"rho", rho},
                 {"d", d},
                 {"chi", sols.back().chi},
                 {"error", std::max(drop, 0.0)},
                 {"converged", drop < tol},
                 {"values", trace},
                 {"optimizer", to_json(sols.back())}}
                .dump()
         << '\n';
    }
  return kExitOk;
}

int cmd_evt(const RunConfig& cfg) {
  const Output out(cfg, "evt");
  auto jl = out.jsonl("evt.jsonl");
  auto clouds_out = out.jsonl("clouds.jsonl");
  const auto spec = cfg.tail();
  const auto shape = cfg.shape();
  const auto n = static_cast<std::size_t>(cfg.get<int>("ensemble"));
  PoissonTestOptions po;
  po.level = cfg.get<double>("level");
  po.seed = derive_seed(seed(cfg), 0x706f6973ULL);
  for (int L : cfg.Ls()) {
    const auto plan = plan_for(cfg, L);
    const auto D = domain_for(cfg, L);
    if (static_cast<std::size_t>(cfg.get<int>("k")) > D->size()) throw ConfigError("k exceeds |D_L|");
    const auto est = a_L_for(cfg, plan);
    std::vector<SampleRecord> recs(n);
    SampleOptions so;
    so.k = cfg.get<int>("k");
    so.mass_radius = cfg.get<int>("mass_radius");
    parallel_for(n, threads(cfg), [&](std::size_t i) { recs[i] = run_sample(D, spec, L, sample_seed(seed(cfg), L, i), so); });
    std::vector<PointCloud> clouds;
    std::vector<double> gaps, masses;
    for (const auto& r : recs) {
      clouds.push_back(rescale(r.spectral, plan, est.a_L, spec.rho));
      gaps.push_back(r.chi_gap);
      masses.push_back(r.mass);
      clouds_out << json{{"L", L}, {"seed", r.seed}, {"heights", clouds.back().heights},
                         {"positions", clouds.back().positions}}
                        .dump()
                 << '\n';
    }
    json rec = {{"L", L},
                {"plan", {{"R", plan.R}, {"N", plan.N}, {"m", plan.m()}, {"ratios", plan.ratios}}},
                {"a_L", est.a_L},
                {"a_L_se", est.se},
                {"n_mc", est.n_mc},
                {"hat_a", hat_a(spec, L, plan.d)},
                {"chi_gap_mean", stats::mean(gaps)},
                {"chi_gap_se", n > 1 ? std::sqrt(stats::variance(gaps) / static_cast<double>(n)) : 0.0},
                {"mass_mean", stats::mean(masses)}};
    json mo = json::array();
    for (const auto& row : max_order_report(est, plan, spec.rho, {-1.0, 0.0, 1.0}))
      mo.push_back({{"s", row.s}, {"ratio", row.ratio}, {"se", row.ratio_se}, {"expected", row.expected}});
    rec["max_order"] = mo;
    if (clouds.size() >= 100) {
      const auto rep = poisson_tests(clouds, shape, po);
      rec["poisson"] = to_json(rep);
      auto qq = out.csv("qq_L" + std::to_string(L) + ".csv", "empirical_increment,exp1_quantile");
      for (std::size_t i = 0; i < rep.qq_empirical.size(); ++i)
        qq << rep.qq_empirical[i] << ',' << rep.qq_theoretical[i] << '\n';
    } else {
      rec["poisson"] = {{"skipped", "insufficient ensemble (need >= 100 clouds)"}};
    }
    jl << rec.dump() << '\n';
  }
  return kExitOk;
}

int cmd_sample(const RunConfig& cfg) {
  const Output out(cfg, "sample");
  auto jl = out.jsonl("fields.jsonl");
  auto csv = out.csv("tail.csv", "L,r,draws,empirical,exact,se,z");
  const auto spec = cfg.tail();
  const auto n = static_cast<std::size_t>(cfg.get<int>("ensemble"));
  for (int L : cfg.Ls()) {
    const auto D = domain_for(cfg, L);
    std::vector<PotentialField> fields;
    fields.reserve(n);
    for (std::size_t i = 0; i < n; ++i) fields.push_back(sample(D, spec, sample_seed(seed(cfg), L, i)));
    for (const auto& f : fields)
      jl << json{{"L", L}, {"seed", f.seed()}, {"values", std::vector<double>(f.values().begin(), f.values().end())}}
                .dump()
         << '\n';
    for (double r : {0.0, spec.rho, 2.0 * spec.rho}) {
      double hits = 0.0, total = 0.0;
      for (const auto& f : fields)
        for (double v : f.values()) {
          hits += v > r;
          total += 1.0;
        }
      const double p = tail_prob(spec, r).value;
      const double emp = hits / total;
      const double se = std::sqrt(p * (1.0 - p) / total);
      csv << L << ',' << r << ',' << total << ',' << emp << ',' << p << ',' << se << ',' << (emp - p) / se << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

const char* version() { return TOPSPEC_VERSION; }

json header(const std::string& command, const RunConfig& cfg) {
  return {{"topspec_version", version()}, {"command", command}, {"config", cfg.reproducible()}};
}

int run(const std::string& command, const RunConfig& cfg) {
  cfg.validate();
  if (command == "spectrum") return cmd_spectrum(cfg);
  if (command == "verify") return cmd_verify(cfg);
  if (command == "chi") return cmd_chi(cfg);
  if (command == "evt") return cmd_evt(cfg);
  if (command == "sample") return cmd_sample(cfg);
  throw ConfigError("unknown subcommand '" + command + "'");
}

std::pair<std::string, json> read_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read '" + path + "'");
  std::string line;
  std::getline(in, line);
  json h;
  try {
    if (line.rfind("# ", 0) == 0)
      h = json::parse(line.substr(2));
    else
      h = json::parse(line).at("header");
    return {h.at("command").get<std::string>(), h.at("config")};
  } catch (const json::exception&) {
    throw ConfigError("'" + path + "' carries no topspec header");
  }
}

}  // namespace topspec::cli
