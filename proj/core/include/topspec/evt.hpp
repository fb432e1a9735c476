#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topspec/field.hpp"
#include "topspec/lattice.hpp"
#include "topspec/regions.hpp"
#include "topspec/spectrum.hpp"
#include "topspec/stats.hpp"

namespace topspec {

struct PlanOverrides {
  std::optional<int> R;
  std::optional<int> N;
};

/// Scales R_L, N_L and the N_L-box partition of D_L.
struct ScalePlan {
  ContinuumShape shape;
  int L = 0;
  int d = 1;
  int R = 1;
  int N = 1;
  int pitch = 2;
  std::size_t domain_size = 0;
  /// Lower corners of the boxes lying wholly inside D_L, lexicographic order.
  std::vector<Site> box_origins;
  nlohmann::json ratios = nlohmann::json::object();

  std::size_t m() const noexcept { return box_origins.size(); }
  LatticeDomain box(std::size_t i) const;
};

/// Defaults R_L = ceil((log log L)^2), N_L = min(ceil((log L)^3), ceil(L/4)), pitch N_L + 1, grid
/// anchored at the coordinatewise minimum of D_L. Throws PreconditionError when m_L < 2 or
/// an override breaks log N_L / log L < 1.
ScalePlan make_plan(const ContinuumShape& shape, int L, const PlanOverrides& overrides = {});

/// Principal Dirichlet eigenvalue of every box of the plan.
std::vector<double> box_eigenvalues(const PotentialField& field, const ScalePlan& plan, unsigned threads = 1);

/// n independent draws of lambda^(1) on the box [0, N-1]^d.
std::vector<double> sample_box_principal(const TailSpec& spec, int d, int N, std::size_t n, std::uint64_t seed,
                                         unsigned threads = 1);

struct ALEstimate {
  double a_L = 0.0;
  double se = 0.0;
  double target_probability = 0.0;
  std::size_t n_mc = 0;
  std::vector<double> samples;
};

/// Empirical (1 - (N/L)^d) quantile of lambda^(1)_{B_N} with a bootstrap standard error.
/// Throws PreconditionError (naming the required n_mc) when n_mc (N/L)^d < 10.
ALEstimate estimate_a_L(const TailSpec& spec, const ScalePlan& plan, std::size_t n_mc, std::uint64_t seed,
                        unsigned threads = 1, int bootstrap = 200);

struct PointCloud {
  std::vector<std::vector<double>> positions;
  std::vector<double> heights;
  int L = 0;
  double a_L = 0.0;
  double rho = 1.0;
  double volume = 1.0;
  std::size_t domain_size = 0;

  /// vol(D) e^{-height}, the points of a unit-rate Poisson process in the limit.
  std::vector<double> W() const;
};

/// Points (X_k / L, (lambda_k - a_L) log|D_L| / rho).
PointCloud rescale(const SpectralResult& spectral, const ScalePlan& plan, double a_L, double rho);

/// A cloud with k points drawn from the limit law: uniform positions on the shape and Poisson heights
/// with intensity e^{-h} dh per unit volume.
PointCloud synthetic_cloud(const ContinuumShape& shape, int k, std::uint64_t seed);

struct PoissonTestOptions {
  double level = 0.01;
  /// Edges of the disjoint W windows used by the count test.
  std::vector<double> windows{0.0, 0.5, 1.0};
  int position_bins = 10;
  int permutations = 199;
  std::size_t max_dcor_points = 500;
  std::uint64_t seed = 7;
};

struct PoissonReport {
  stats::TestResult increments;
  stats::TestResult counts;
  stats::TestResult positions;
  stats::TestResult independence;
  std::size_t clouds = 0;
  std::size_t censored = 0;
  /// Bonferroni: each p-value compared with level / 4.
  bool all_pass = false;
  /// Sorted increments and matching Exp(1) quantiles.
  std::vector<double> qq_empirical;
  std::vector<double> qq_theoretical;
};

nlohmann::json to_json(const PoissonReport& r);

/// Needs at least 100 clouds.
PoissonReport poisson_tests(const std::vector<PointCloud>& clouds, const ContinuumShape& shape,
                            const PoissonTestOptions& opts = {});

/// max xi - lambda^(1).
double chi_gap_statistic(const SpectralResult& spectral, const PotentialField& field);

/// Mass of |psi_k|^2 in the l1 ball of radius r around X_k (k is 1-based).
double localization_mass(const SpectralResult& spectral, int k, int r);

struct DecayFit {
  double c1 = 0.0;
  double c2_near = 0.0;
  double c2_far = 0.0;
  bool far_available = false;
  std::size_t n_near = 0;
  std::size_t n_far = 0;
};

/// Least-squares fit of log|psi_k| against |z - X_k| below and beyond `cut` (log L by default).
/// Values under `floor` are left out as numerical noise.
DecayFit decay_fit(const SpectralResult& spectral, int k, double cut, double floor = 1e-13);

struct MaxOrderRow {
  double s = 0.0;
  double ratio = 0.0;
  double ratio_se = 0.0;
  double expected = 0.0;
};

/// P(lambda_{B_N} >= a_L + s b_L) / (N/L)^d against e^{-s}, b_L = rho / (d log L).
std::vector<MaxOrderRow> max_order_report(const ALEstimate& est, const ScalePlan& plan, double rho,
                                          const std::vector<double>& s_values);

struct PartitionStability {
  double p_N = 0.0;
  double p_R = 0.0;
  double lhs = 0.0;
  double volume_ratio = 0.0;
  /// Smallest c with lhs >= (1 - cR/N)(N/R)^d p_R.
  double c_fit = 0.0;
};

PartitionStability partition_stability(const TailSpec& spec, int d, int N, int R, double a, std::size_t n_mc,
                                       std::uint64_t seed, unsigned threads = 1);

/// One ensemble member: field on D_L, top-k spectrum and the per-sample statistics.
struct SampleRecord {
  std::uint64_t seed = 0;
  int L = 0;
  std::vector<double> eigenvalues;
  std::vector<Site> centers;
  std::vector<double> residuals;
  double max_xi = 0.0;
  double chi_gap = 0.0;
  double mass = 0.0;
  DecayFit fit;
  SpectralResult spectral;
};

struct SampleOptions {
  int k = 5;
  int mass_radius = 25;
  bool keep_vectors = false;
};

SampleRecord run_sample(std::shared_ptr<const LatticeDomain> D_L, const TailSpec& spec, int L, std::uint64_t seed,
                        const SampleOptions& opts);

nlohmann::json to_json(const SampleRecord& r);

}  // namespace topspec
