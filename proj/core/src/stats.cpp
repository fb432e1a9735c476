#include "topspec/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "topspec/error.hpp"
#include "topspec/rng.hpp"

namespace topspec::stats {

double ks_statistic(std::vector<double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) throw PreconditionError("ks_statistic: empty sample");
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double D = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double F = cdf(sample[i]);
    D = std::max({D, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  return D;
}

double kolmogorov_pvalue(double D, std::size_t n) {
  if (n == 0) return 1.0;
  const double sn = std::sqrt(static_cast<double>(n));
  const double t = (sn + 0.12 + 0.11 / sn) * D;
  if (t < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * t * t);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

TestResult ks_test(std::vector<double> sample, const std::function<double(double)>& cdf) {
  TestResult r;
  r.n = sample.size();
  r.statistic = ks_statistic(std::move(sample), cdf);
  r.p_value = kolmogorov_pvalue(r.statistic, r.n);
  return r;
}

TestResult ks_exponential(std::vector<double> sample, double rate) {
  return ks_test(std::move(sample), [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); });
}

double chi_square_sf(double statistic, double dof) {
  if (dof <= 0.0) return 1.0;
  if (statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(dof / 2.0, statistic / 2.0);
}

TestResult chi_square(std::vector<double> observed, std::vector<double> expected, double min_expected,
                      int fitted_parameters) {
  if (observed.size() != expected.size() || observed.empty())
    throw PreconditionError("chi_square: observed/expected size mismatch");
  // Pool small cells left to right, then fold a small tail into the last kept cell.
  std::vector<double> o, e;
  double ao = 0.0, ae = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    ao += observed[i];
    ae += expected[i];
    if (ae >= min_expected) {
      o.push_back(ao);
      e.push_back(ae);
      ao = ae = 0.0;
    }
  }
  if (ae > 0.0 || ao > 0.0) {
    if (e.empty()) {
      o.push_back(ao);
      e.push_back(ae);
    } else {
      o.back() += ao;
      e.back() += ae;
    }
  }
  TestResult r;
  for (std::size_t i = 0; i < o.size(); ++i)
    if (e[i] > 0.0) r.statistic += (o[i] - e[i]) * (o[i] - e[i]) / e[i];
  r.dof = static_cast<double>(o.size()) - 1.0 - fitted_parameters;
  r.n = static_cast<std::size_t>(std::accumulate(observed.begin(), observed.end(), 0.0));
  r.p_value = chi_square_sf(r.statistic, r.dof);
  return r;
}

namespace {

std::vector<double> centered_distances(std::span<const double> x, std::size_t p, std::size_t n) {
  std::vector<double> a(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p; ++k) {
        const double t = x[i * p + k] - x[j * p + k];
        s += t * t;
      }
      a[i * n + j] = a[j * n + i] = std::sqrt(s);
    }
  std::vector<double> row(n, 0.0);
  double all = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) row[i] += a[i * n + j];
    all += row[i];
    row[i] /= static_cast<double>(n);
  }
  all /= static_cast<double>(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a[i * n + j] += all - row[i] - row[j];
  return a;
}

double dcor_from(const std::vector<double>& A, const std::vector<double>& B, std::size_t n,
                 const std::vector<std::size_t>& perm, double vA, double vB) {
  double cov = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t pi = perm[i];
    for (std::size_t j = 0; j < n; ++j) cov += A[i * n + j] * B[pi * n + perm[j]];
  }
  const double denom = std::sqrt(vA * vB);
  return denom > 0.0 ? std::sqrt(std::max(cov, 0.0) / denom) : 0.0;
}

}  // namespace

double distance_correlation(std::span<const double> x, std::size_t p, std::span<const double> y, std::size_t q) {
  const std::size_t n = x.size() / p;
  if (y.size() / q != n || n < 2) throw PreconditionError("distance_correlation: need matching n >= 2");
  const auto A = centered_distances(x, p, n);
  const auto B = centered_distances(y, q, n);
  std::vector<std::size_t> id(n);
  std::iota(id.begin(), id.end(), 0);
  double vA = 0.0, vB = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) {
    vA += A[i] * A[i];
    vB += B[i] * B[i];
  }
  return dcor_from(A, B, n, id, vA, vB);
}

TestResult dcor_permutation_test(std::span<const double> x, std::size_t p, std::span<const double> y, std::size_t q,
                                 int permutations, std::uint64_t seed) {
  const std::size_t n = x.size() / p;
  if (y.size() / q != n || n < 2) throw PreconditionError("dcor_permutation_test: need matching n >= 2");
  const auto A = centered_distances(x, p, n);
  const auto B = centered_distances(y, q, n);
  double vA = 0.0, vB = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) {
    vA += A[i] * A[i];
    vB += B[i] * B[i];
  }
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  TestResult r;
  r.n = n;
  r.statistic = dcor_from(A, B, n, perm, vA, vB);
  CounterRng rng(derive_seed(seed, 0x64636f72ULL));
  int at_least = 0;
  for (int b = 0; b < permutations; ++b) {
    std::shuffle(perm.begin(), perm.end(), rng);
    if (dcor_from(A, B, n, perm, vA, vB) >= r.statistic) ++at_least;
  }
  r.p_value = (1.0 + at_least) / (1.0 + permutations);
  return r;
}

double quantile(std::vector<double> sample, double prob) {
  if (sample.empty()) throw PreconditionError("quantile: empty sample");
  std::sort(sample.begin(), sample.end());
  const double h = (static_cast<double>(sample.size()) - 1.0) * std::clamp(prob, 0.0, 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

double bootstrap_se(std::span<const double> sample, const std::function<double(std::vector<double>&)>& estimator,
                    int replicates, std::uint64_t seed) {
  if (sample.empty() || replicates < 2) return 0.0;
  CounterRng rng(derive_seed(seed, 0x626f6f74ULL));
  std::vector<double> est, resample(sample.size());
  for (int b = 0; b < replicates; ++b) {
    for (auto& v : resample) v = sample[static_cast<std::size_t>(rng() % sample.size())];
    est.push_back(estimator(resample));
  }
  return std::sqrt(variance(est));
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

double correlation(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  return saa > 0.0 && sbb > 0.0 ? sab / std::sqrt(saa * sbb) : 0.0;
}

}  // namespace topspec::stats
