#include "topspec/serialize.hpp"

#include "topspec/error.hpp"

namespace topspec {

using nlohmann::json;

json site_to_json(const Site& s) {
  json j = json::array();
  for (int a = 0; a < s.dim(); ++a) j.push_back(s[a]);
  return j;
}

Site site_from_json(const json& j) {
  if (!j.is_array() || j.empty() || j.size() > static_cast<std::size_t>(kMaxDim))
    throw DomainError("site must be an array of 1.." + std::to_string(kMaxDim) + " integers");
  std::vector<int> c = j.get<std::vector<int>>();
  return Site(std::span<const int>(c));
}

json to_json(const LatticeDomain& D) {
  json sites = json::array();
  for (const auto& s : D) sites.push_back(site_to_json(s));
  return {{"d", D.dim()}, {"sites", sites}};
}

LatticeDomain domain_from_json(const json& j) {
  const int d = j.at("d").get<int>();
  std::vector<Site> sites;
  for (const auto& s : j.at("sites")) {
    sites.push_back(site_from_json(s));
    if (sites.back().dim() != d) throw DomainError("site dimension does not match d");
  }
  return LatticeDomain(d, std::move(sites));
}

json to_json(const TailSpec& spec) { return {{"rho", spec.rho}, {"kind", to_string(spec.kind)}, {"c", spec.c}}; }

TailSpec tail_from_json(const json& j) {
  const double rho = j.at("rho").get<double>();
  const auto kind = tail_kind_from_string(j.value("kind", std::string("exact")));
  if (kind == TailSpec::Kind::exact) return TailSpec::exact(rho);
  return TailSpec::perturbed(rho, kind, j.value("c", 0.0));
}

json to_json(const PotentialField& field) {
  return {{"domain", to_json(field.domain())},
          {"tail", to_json(field.spec())},
          {"seed", field.seed()},
          {"values", std::vector<double>(field.values().begin(), field.values().end())}};
}

PotentialField field_from_json(const json& j) {
  auto D = std::make_shared<const LatticeDomain>(domain_from_json(j.at("domain")));
  auto values = j.at("values").get<std::vector<double>>();
  if (values.size() != D->size()) throw DomainError("field values do not match the domain size");
  return PotentialField(std::move(D), std::move(values), tail_from_json(j.at("tail")),
                        j.value("seed", std::uint64_t{0}));
}

json to_json(const SpectralResult& r, bool include_vectors) {
  json centers = json::array();
  for (const auto& c : r.centers) centers.push_back(site_to_json(c));
  json j = {{"eigenvalues", r.eigenvalues}, {"centers", centers}, {"residuals", r.residuals}};
  if (include_vectors && r.has_vectors()) {
    json vecs = json::array();
    for (std::size_t k = 0; k < r.count(); ++k) {
      auto v = r.vector(k);
      vecs.push_back(std::vector<double>(v.begin(), v.end()));
    }
    j["eigenvectors"] = vecs;
  }
  return j;
}

json to_json(const RegionDecomposition& dec) {
  json comps = json::array();
  for (std::size_t c = 0; c < dec.components.size(); ++c)
    comps.push_back({{"sites", to_json(dec.components[c])["sites"]},
                     {"principal_eigenvalue", dec.principal_values[c]},
                     {"trimmed", static_cast<bool>(dec.trimmed[c])}});
  return {{"R", dec.R}, {"A", dec.A}, {"lambda1", dec.lambda1}, {"region_size", dec.region.size()},
          {"components", comps}};
}

json to_json(const ContractedDistance& cd) {
  json rows = json::array();
  for (const auto& row : cd.dist) {
    json r = json::array();
    for (int v : row) r.push_back(v == ContractedDistance::kInfinity ? json(nullptr) : json(v));
    rows.push_back(r);
  }
  return {{"distances", rows}};
}

json to_json(const ChiSolution& s) {
  json runs = json::array();
  for (const auto& r : s.runs)
    runs.push_back({{"start", r.start},
                    {"chi", r.chi},
                    {"iterations", r.iterations},
                    {"converged", r.converged},
                    {"used_fallback", r.used_fallback}});
  json j = {{"chi", s.chi},
            {"iterations", s.iterations},
            {"kkt_residual", s.kkt_residual},
            {"used_fallback", s.used_fallback},
            {"optimizer", s.optimizer.values},
            {"trace", s.trace},
            {"runs", runs}};
  if (s.optimizer.support) j["support"] = to_json(*s.optimizer.support)["sites"];
  return j;
}

}  // namespace topspec
