#pragma once

#include <nlohmann/json.hpp>

#include "topspec/field.hpp"
#include "topspec/lattice.hpp"
#include "topspec/regions.hpp"
#include "topspec/spectrum.hpp"
#include "topspec/variational.hpp"

namespace topspec {

nlohmann::json site_to_json(const Site& s);
Site site_from_json(const nlohmann::json& j);

/// {"d": d, "sites": [[...], ...]}.
nlohmann::json to_json(const LatticeDomain& D);
LatticeDomain domain_from_json(const nlohmann::json& j);

nlohmann::json to_json(const TailSpec& spec);
TailSpec tail_from_json(const nlohmann::json& j);

/// Domain, tail law, seed and values.
nlohmann::json to_json(const PotentialField& field);
PotentialField field_from_json(const nlohmann::json& j);

nlohmann::json to_json(const SpectralResult& r, bool include_vectors = false);

/// Infinite contracted distances are written as null.
nlohmann::json to_json(const RegionDecomposition& dec);
nlohmann::json to_json(const ContractedDistance& cd);

nlohmann::json to_json(const ChiSolution& s);

}  // namespace topspec
