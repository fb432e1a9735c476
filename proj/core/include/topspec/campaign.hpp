#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topspec/verify.hpp"

namespace topspec {

enum class Campaign { truncation, l2, gap, inclusion, gap_mass, confinement, decay, martingale };

std::string to_string(Campaign c);
/// Throws PreconditionError for an unknown name.
Campaign campaign_from_string(const std::string& name);
const std::vector<Campaign>& all_campaigns();
/// Campaigns whose failures are theorem falsifications (martingale is statistical).
bool deterministic(Campaign c);

struct CampaignOptions {
  std::size_t instances = 100;
  std::uint64_t seed = 1;
  unsigned threads = 1;
  /// Decay: stop after this many attempts even when fewer instances were admissible.
  std::size_t max_attempts = 0;
  std::size_t martingale_paths = 100000;
  int martingale_horizon = 15;
  /// Truncation: fixed (A, R) instead of drawn ones.
  std::optional<double> A;
  std::optional<int> R;
};

struct CampaignResult {
  Campaign campaign = Campaign::truncation;
  std::vector<CheckReport> reports;
  std::size_t attempts = 0;
  std::size_t pass = 0;
  std::size_t fail = 0;
  std::size_t inapplicable = 0;
  std::size_t indeterminate = 0;
  std::size_t falsified = 0;
  double min_margin = 0.0;
  double seconds = 0.0;

  nlohmann::json summary() const;
};

/// Background field with planted peaks: values background + U(-spread, spread) off the peaks.
PotentialField planted_field(std::shared_ptr<const LatticeDomain> D, double background, double spread,
                             const std::vector<std::pair<Site, double>>& peaks, std::uint64_t seed);

/// One instance of a campaign, fully determined by (campaign seed, index). The report's instance
/// block carries both, and the field itself when the check fails.
CheckReport campaign_instance(Campaign c, std::uint64_t seed, std::size_t index, const CampaignOptions& opts);

/// Runs opts.instances instances (for decay: until that many are admissible). Reports come back
/// in index order whatever the thread count. `progress` is called after each finished instance.
CampaignResult run_campaign(Campaign c, const CampaignOptions& opts,
                            const std::function<void(std::size_t)>& progress = {});

struct CouplingEnsemble {
  std::vector<CheckReport> reports;
  std::size_t holds = 0;
  double fraction = 0.0;
};

/// Coupling event per sample on D_L = L(0,1)^d with the box partition of `plan`.
CouplingEnsemble coupling_ensemble(const TailSpec& spec, int L, int d, int N, int R, double A, std::size_t ensemble,
                                   std::uint64_t seed, unsigned threads = 1);

}  // namespace topspec
