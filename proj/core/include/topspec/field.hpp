#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "topspec/lattice.hpp"

namespace topspec {

/// Upper-tail law of the potential: P(xi > r) = exp(-e^{F(r)}).
///
/// `exact`:    F(r) = r / rho.
/// `log_abs`:  F(r) = r / rho + c log(1 + |r|).
/// `log_sq`:   F(r) = r / rho + (c/2) log(1 + r^2)   (C^1 everywhere).
/// The perturbations need |c| < 1/rho (resp. |c| < 2/rho) so F stays strictly increasing.
struct TailSpec {
  enum class Kind { exact, log_abs, log_sq };

  double rho = 1.0;
  Kind kind = Kind::exact;
  double c = 0.0;

  static TailSpec exact(double rho);
  static TailSpec perturbed(double rho, Kind kind, double c);

  void validate() const;
  double F(double r) const;
  double dF(double r) const;
  /// Solves F(r) = y.
  double F_inverse(double y) const;

  friend bool operator==(const TailSpec&, const TailSpec&) = default;
};

std::string to_string(TailSpec::Kind kind);
TailSpec::Kind tail_kind_from_string(const std::string& name);

/// A realised potential on a domain. Values are stored in the domain's site order.
class PotentialField {
 public:
  PotentialField(std::shared_ptr<const LatticeDomain> domain, std::vector<double> values, TailSpec spec,
                 std::uint64_t seed);

  const LatticeDomain& domain() const noexcept { return *domain_; }
  const std::shared_ptr<const LatticeDomain>& domain_ptr() const noexcept { return domain_; }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double at(const Site& s) const;
  const TailSpec& spec() const noexcept { return spec_; }
  std::uint64_t seed() const noexcept { return seed_; }

  /// The same field restricted to a subdomain U of the domain.
  PotentialField restrict_to(std::shared_ptr<const LatticeDomain> U) const;
  /// xi + c.
  PotentialField shifted(double c) const;
  double max_value() const;

 private:
  std::shared_ptr<const LatticeDomain> domain_;
  std::vector<double> values_;
  TailSpec spec_;
  std::uint64_t seed_;
};

/// Inverse-CDF transform: the r with P(xi > r) = u, u in (0, 1).
double quantile_from_uniform(const TailSpec& spec, double u);

/// Per-site stream key. Depends only on (seed, site coordinates), never on iteration order.
std::uint64_t site_stream_key(std::uint64_t seed, const Site& s);
double sample_site(const TailSpec& spec, std::uint64_t seed, const Site& s);

/// i.i.d. draws on every site of `domain`.
PotentialField sample(std::shared_ptr<const LatticeDomain> domain, const TailSpec& spec, std::uint64_t seed);

struct TailValue {
  double value;
  bool underflow;
};

/// exp(-e^{F(r)}); `underflow` is set when the result is below the smallest normal double.
TailValue tail_prob(const TailSpec& spec, double r);
/// log P(xi > r) = -e^{F(r)}, stable for large r.
double log_tail_prob(const TailSpec& spec, double r);

/// The unique a with P(xi > a) = L^{-d}.
double hat_a(const TailSpec& spec, double L, int d);
/// P(xi > a) = p for arbitrary p in (0, 1).
double tail_quantile(const TailSpec& spec, double p);

/// Density F'(r) e^{F(r)} exp(-e^{F(r)}).
double density(const TailSpec& spec, double r);

}  // namespace topspec
