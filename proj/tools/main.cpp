#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "topspec/error.hpp"
#include "topspec/verify.hpp"

namespace {

constexpr int kExitRuntime = 3;

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
  std::optional<std::string> L;
  std::optional<double> rho;
  std::optional<int> k;
  std::optional<int> ensemble;
  std::vector<std::string> sets;
};

void add_flags(CLI::App* app, Flags& f) {
  app->add_option("--config", f.config, "key = value configuration file");
  app->add_option("--seed", f.seed, "master seed");
  app->add_option("--out", f.out, "output directory");
  app->add_option("--threads", f.threads, "worker threads");
  app->add_option("--L", f.L, "scale parameter(s), comma separated");
  app->add_option("--rho", f.rho, "tail parameter rho");
  app->add_option("--k", f.k, "number of top eigenpairs");
  app->add_option("--ensemble", f.ensemble, "ensemble size");
  app->add_option("--set", f.sets, "extra key=value overrides")->take_all();
}

void apply(topspec::cli::RunConfig& cfg, const Flags& f) {
  if (!f.config.empty()) cfg.load_file(f.config);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw topspec::cli::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.seed) cfg.set("seed", std::to_string(*f.seed));
  if (f.out) cfg.set("out", *f.out);
  if (f.threads) cfg.set("threads", std::to_string(*f.threads));
  if (f.L) cfg.set("L", *f.L);
  if (f.rho) cfg.set("rho", std::to_string(*f.rho));
  if (f.k) cfg.set("k", std::to_string(*f.k));
  if (f.ensemble) cfg.set("ensemble", std::to_string(*f.ensemble));
}

}  // namespace

int main(int argc, char** argv) {
  using namespace topspec::cli;
  CLI::App app{"Top-of-spectrum toolkit for lattice random Schroedinger operators"};
  app.set_version_flag("--version", std::string(version()));
  Flags flags;
  std::string replay;
  bool print_schema = false;
  bool inject_fault = false;
  app.add_option("--replay", replay, "rerun the command recorded in an output file");
  app.add_flag("--print-schema", print_schema, "print the configuration JSON schema");
  app.add_flag("--inject-fault", inject_fault, "test only: reverse the final inequality of every checker")
      ->group("");
  std::vector<std::pair<std::string, CLI::App*>> subs;
  for (const char* name : {"spectrum", "verify", "chi", "evt", "sample"}) {
    static const std::map<std::string, std::string> help{
        {"spectrum", "top-k spectra, centres and per-sample statistics of an ensemble"},
        {"verify", "randomized theorem-checking campaigns"},
        {"chi", "chi over l1 balls and its extrapolation"},
        {"evt", "a_L estimate, rescaled point clouds and the Poisson test battery"},
        {"sample", "potential fields and their empirical tail"}};
    auto* sub = app.add_subcommand(name, help.at(name));
    add_flags(sub, flags);
    subs.emplace_back(name, sub);
  }
  app.add_option("--out", flags.out, "output directory (with --replay)");
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (print_schema) {
      std::cout << RunConfig::schema().dump(2) << '\n';
      return kExitOk;
    }
    topspec::set_fault_injection(inject_fault);
    RunConfig cfg;
    std::string command;
    if (!replay.empty()) {
      auto [cmd, values] = read_header(replay);
      command = cmd;
      cfg.assign(values);
      if (flags.out) cfg.set("out", *flags.out);
      if (flags.threads) cfg.set("threads", std::to_string(*flags.threads));
    } else {
      for (const auto& [name, sub] : subs)
        if (sub->parsed()) command = name;
      if (command.empty()) {
        std::cerr << app.help();
        return kExitConfig;
      }
      apply(cfg, flags);
    }
    return run(command, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const topspec::PreconditionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
