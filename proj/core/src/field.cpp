#include "topspec/field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/tools/toms748_solve.hpp>

#include "topspec/error.hpp"
#include "topspec/rng.hpp"

namespace topspec {

TailSpec TailSpec::exact(double rho) {
  TailSpec s;
  s.rho = rho;
  s.validate();
  return s;
}

TailSpec TailSpec::perturbed(double rho, Kind kind, double c) {
  TailSpec s;
  s.rho = rho;
  s.kind = kind;
  s.c = c;
  s.validate();
  return s;
}

void TailSpec::validate() const {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw PreconditionError("tail spec: rho must lie in (0, inf)");
  if (!std::isfinite(c)) throw PreconditionError("tail spec: perturbation constant must be finite");
  switch (kind) {
    case Kind::exact:
      break;
    case Kind::log_abs:
      if (!(std::abs(c) < 1.0 / rho)) throw PreconditionError("tail spec: log_abs needs |c| < 1/rho");
      break;
    case Kind::log_sq:
      if (!(std::abs(c) < 2.0 / rho)) throw PreconditionError("tail spec: log_sq needs |c| < 2/rho");
      break;
  }
}

double TailSpec::F(double r) const {
  switch (kind) {
    case Kind::exact:
      return r / rho;
    case Kind::log_abs:
      return r / rho + c * std::log1p(std::abs(r));
    case Kind::log_sq:
      return r / rho + 0.5 * c * std::log1p(r * r);
  }
  return r / rho;
}

double TailSpec::dF(double r) const {
  switch (kind) {
    case Kind::exact:
      return 1.0 / rho;
    case Kind::log_abs:
      return 1.0 / rho + c * (r >= 0 ? 1.0 : -1.0) / (1.0 + std::abs(r));
    case Kind::log_sq:
      return 1.0 / rho + c * r / (1.0 + r * r);
  }
  return 1.0 / rho;
}

double TailSpec::F_inverse(double y) const {
  if (kind == Kind::exact) return rho * y;
  // F(r) - r/rho is O(log|r|), so the root sits near rho*y; widen until bracketed.
  double lo = rho * y - 1.0, hi = rho * y + 1.0;
  double step = 1.0;
  while (F(lo) > y) {
    step *= 2.0;
    lo -= step;
  }
  step = 1.0;
  while (F(hi) < y) {
    step *= 2.0;
    hi += step;
  }
  std::uintmax_t iterations = 200;
  const auto root = boost::math::tools::toms748_solve([&](double r) { return F(r) - y; }, lo, hi,
                                                      boost::math::tools::eps_tolerance<double>(50), iterations);
  return 0.5 * (root.first + root.second);
}

std::string to_string(TailSpec::Kind kind) {
  switch (kind) {
    case TailSpec::Kind::exact:
      return "exact";
    case TailSpec::Kind::log_abs:
      return "log_abs";
    case TailSpec::Kind::log_sq:
      return "log_sq";
  }
  return "exact";
}

TailSpec::Kind tail_kind_from_string(const std::string& name) {
  if (name == "exact") return TailSpec::Kind::exact;
  if (name == "log_abs") return TailSpec::Kind::log_abs;
  if (name == "log_sq") return TailSpec::Kind::log_sq;
  throw PreconditionError("unknown tail kind '" + name + "'");
}

PotentialField::PotentialField(std::shared_ptr<const LatticeDomain> domain, std::vector<double> values,
                               TailSpec spec, std::uint64_t seed)
    : domain_(std::move(domain)), values_(std::move(values)), spec_(spec), seed_(seed) {
  if (!domain_) throw DomainError("field: null domain");
  if (values_.size() != domain_->size()) throw DomainError("field/domain mismatch");
}

double PotentialField::at(const Site& s) const {
  auto i = domain_->index_of(s);
  if (!i) throw DomainError("field: site outside domain");
  return values_[*i];
}

PotentialField PotentialField::restrict_to(std::shared_ptr<const LatticeDomain> U) const {
  std::vector<double> v;
  v.reserve(U->size());
  for (const auto& s : *U) v.push_back(at(s));
  return PotentialField(std::move(U), std::move(v), spec_, seed_);
}

PotentialField PotentialField::shifted(double c) const {
  std::vector<double> v(values_);
  for (auto& x : v) x += c;
  return PotentialField(domain_, std::move(v), spec_, seed_);
}

double PotentialField::max_value() const {
  if (values_.empty()) throw DomainError("field: empty domain has no maximum");
  return *std::max_element(values_.begin(), values_.end());
}

double quantile_from_uniform(const TailSpec& spec, double u) {
  if (!(u > 0.0 && u < 1.0)) throw PreconditionError("quantile_from_uniform: u must lie in (0, 1)");
  // P(xi > r) = u  <=>  F(r) = log log(1/u); -log(u) computed as -log(u) keeps precision near u -> 1.
  return spec.F_inverse(std::log(-std::log(u)));
}

std::uint64_t site_stream_key(std::uint64_t seed, const Site& s) {
  std::uint64_t key = static_cast<std::uint64_t>(s.dim());
  for (int a = 0; a < s.dim(); ++a) key = mix64(key ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(s[a])));
  return derive_seed(seed, key);
}

double sample_site(const TailSpec& spec, std::uint64_t seed, const Site& s) {
  CounterRng rng(site_stream_key(seed, s));
  double u;
  do {
    u = rng.uniform();
  } while (u == 0.0);  // u = 1 cannot occur with 53-bit mantissa draws
  return quantile_from_uniform(spec, u);
}

PotentialField sample(std::shared_ptr<const LatticeDomain> domain, const TailSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::vector<double> v;
  v.reserve(domain->size());
  for (const auto& s : *domain) v.push_back(sample_site(spec, seed, s));
  return PotentialField(std::move(domain), std::move(v), spec, seed);
}

double log_tail_prob(const TailSpec& spec, double r) { return -std::exp(spec.F(r)); }

TailValue tail_prob(const TailSpec& spec, double r) {
  const double lp = log_tail_prob(spec, r);
  const double p = std::exp(lp);
  return {p, p < std::numeric_limits<double>::min()};
}

double tail_quantile(const TailSpec& spec, double p) {
  if (!(p > 0.0 && p < 1.0)) throw PreconditionError("tail_quantile: p must lie in (0, 1)");
  return spec.F_inverse(std::log(-std::log(p)));
}

double hat_a(const TailSpec& spec, double L, int d) {
  if (!(L >= 2.0)) throw PreconditionError("hat_a: L must be >= 2");
  // e^{F(a)} = d log L
  return spec.F_inverse(std::log(d * std::log(L)));
}

double density(const TailSpec& spec, double r) {
  const double F = spec.F(r);
  const double dF = spec.dF(r);
  if (dF <= 0.0) return 0.0;
  return std::exp(std::log(dF) + F - std::exp(F));
}

}  // namespace topspec
