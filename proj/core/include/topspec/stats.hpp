#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace topspec::stats {

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  double dof = 0.0;
  std::size_t n = 0;
};

/// sup_x |F_n(x) - F(x)| for a continuous CDF F.
double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf);
/// Asymptotic Kolmogorov tail P(sqrt(n) D > t) with Stephens' small-sample correction.
double kolmogorov_pvalue(double D, std::size_t n);
TestResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf);
TestResult ks_exponential(std::vector<double> sample, double rate = 1.0);

/// Pearson chi-square; cells with expected < min_expected are pooled into their neighbour.
TestResult chi_square(std::vector<double> observed, std::vector<double> expected, double min_expected = 5.0,
                      int fitted_parameters = 0);
/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

/// Sample distance correlation between rows of x (n x p, row-major) and y (n x q).
double distance_correlation(std::span<const double> x, std::size_t p, std::span<const double> y, std::size_t q);
/// Permutation test of independence based on distance correlation.
TestResult dcor_permutation_test(std::span<const double> x, std::size_t p, std::span<const double> y, std::size_t q,
                                 int permutations, std::uint64_t seed);

/// Type-7 empirical quantile.
double quantile(std::vector<double> sample, double prob);
/// Bootstrap standard error of an estimator.
double bootstrap_se(std::span<const double> sample, const std::function<double(std::vector<double>&)>& estimator,
                    int replicates, std::uint64_t seed);

double mean(std::span<const double> v);
double variance(std::span<const double> v);
double correlation(std::span<const double> a, std::span<const double> b);

}  // namespace topspec::stats
