#include "config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "topspec/error.hpp"

namespace topspec::cli {

using nlohmann::json;

namespace {

struct KeyInfo {
  const char* key;
  json value;
  const char* description;
};

const std::vector<KeyInfo>& keys() {
  static const std::vector<KeyInfo> k{
      {"shape", "box", "continuum shape D: box (the unit box (0,1)^d) or ball (radius 1/2 around the centre)"},
      {"d", 1, "lattice dimension, 1..4"},
      {"L", json::array({1000}), "scale parameter(s) L; comma separated list"},
      {"rho", 1.0, "tail parameter rho > 0"},
      {"tail", "exact", "tail kind: exact, log_abs or log_sq"},
      {"tail_c", 0.0, "perturbation coefficient c of the tail"},
      {"k", 5, "number of top eigenpairs"},
      {"ensemble", 10, "ensemble size"},
      {"seed", 1, "master seed"},
      {"threads", 1, "worker threads (does not change results)"},
      {"out", "topspec-out", "output directory (created when missing)"},
      {"R", 0, "override of R_L (0 keeps the default plan)"},
      {"N", 0, "override of N_L (0 keeps the default plan)"},
      {"A", 3.0, "energy window A for regions and the coupling event"},
      {"campaigns", json::array({"all"}),
       "verify campaigns: all or a list of truncation, l2, gap, inclusion, gap_mass, confinement, decay, martingale"},
      {"instances", 100, "instances per verify campaign"},
      {"paths", 100000, "random-walk paths per martingale instance"},
      {"horizon", 15, "martingale horizon"},
      {"rhos", json::array({1.0}), "chi table: values of rho"},
      {"dims", json::array({1}), "chi table: dimensions"},
      {"max_n", 12, "chi table: largest ball radius"},
      {"tol", 1e-10, "chi table: tolerance of the extrapolation"},
      {"n_mc", 0, "evt: Monte Carlo boxes for a_L (0 picks 40 / (N/L)^d)"},
      {"bootstrap", 200, "evt: bootstrap replicates for the a_L standard error"},
      {"mass_radius", 25, "radius of the localization-mass ball"},
      {"level", 0.01, "evt: level of the Poisson test battery"},
      {"rescale", false, "spectrum: estimate a_L and emit rescaled points"},
  };
  return k;
}

const KeyInfo* find(const std::string& key) {
  for (const auto& k : keys())
    if (key == k.key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

json parse_scalar(const json& like, const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  try {
    std::size_t pos = 0;
    if (like.is_boolean()) {
      if (t == "true" || t == "1") return true;
      if (t == "false" || t == "0") return false;
      throw ConfigError("");
    }
    if (like.is_number_integer()) {
      const long long v = std::stoll(t, &pos);
      if (pos != t.size()) throw ConfigError("");
      return v;
    }
    if (like.is_number()) {
      const double v = std::stod(t, &pos);
      if (pos != t.size()) throw ConfigError("");
      return v;
    }
    if (t.empty()) throw ConfigError("");
    return t;
  } catch (const std::exception&) {
    throw ConfigError("bad value '" + text + "' for key '" + key + "'");
  }
}

const char* type_name(const json& v) {
  if (v.is_boolean()) return "boolean";
  if (v.is_number_integer()) return "integer";
  if (v.is_number()) return "number";
  if (v.is_array()) return "array";
  return "string";
}

}  // namespace

RunConfig::RunConfig() : values_(defaults()) {}

const json& RunConfig::defaults() {
  static const json d = [] {
    json j = json::object();
    for (const auto& k : keys()) j[k.key] = k.value;
    return j;
  }();
  return d;
}

json RunConfig::schema() {
  json props = json::object();
  for (const auto& k : keys()) {
    json p = {{"type", type_name(k.value)}, {"default", k.value}, {"description", k.description}};
    if (k.value.is_array()) p["items"] = {{"type", type_name(k.value.front())}};
    props[k.key] = p;
  }
  props["shape"]["enum"] = {"box", "ball"};
  props["tail"]["enum"] = {"exact", "log_abs", "log_sq"};
  props["d"]["minimum"] = 1;
  props["d"]["maximum"] = kMaxDim;
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "topspec run configuration"},
          {"type", "object"},
          {"additionalProperties", false},
          {"properties", props}};
}

void RunConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  load_text(ss.str());
}

void RunConfig::load_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    set(trim(line.substr(0, eq)), line.substr(eq + 1));
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  const auto* info = find(key);
  if (!info) throw ConfigError("unknown config key '" + key + "'");
  if (info->value.is_array()) {
    json arr = json::array();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) arr.push_back(parse_scalar(info->value.front(), key, item));
    if (arr.empty()) throw ConfigError("empty list for key '" + key + "'");
    values_[key] = arr;
  } else {
    values_[key] = parse_scalar(info->value, key, value);
  }
}

void RunConfig::assign(const json& values) {
  if (!values.is_object()) throw ConfigError("config must be a JSON object");
  for (auto it = values.begin(); it != values.end(); ++it) {
    const auto* info = find(it.key());
    if (!info) throw ConfigError("unknown config key '" + it.key() + "'");
    if (std::string(type_name(it.value())) != type_name(info->value) &&
        !(info->value.is_number() && it.value().is_number()))
      throw ConfigError("wrong type for key '" + it.key() + "'");
    values_[it.key()] = it.value();
  }
}

void RunConfig::validate() const {
  auto positive = [&](const char* key) {
    if (!(values_.at(key).get<double>() > 0)) throw ConfigError(std::string(key) + " must be positive");
  };
  const int d = get<int>("d");
  if (d < 1 || d > kMaxDim) throw ConfigError("d must lie in 1.." + std::to_string(kMaxDim));
  for (const char* k : {"rho", "k", "ensemble", "threads", "A", "instances", "paths", "tol", "level", "bootstrap"})
    positive(k);
  if (get<int>("horizon") < 0 || get<int>("max_n") < 0 || get<int>("R") < 0 || get<int>("N") < 0 ||
      get<int>("n_mc") < 0 || get<int>("mass_radius") < 0 || get<long long>("seed") < 0)
    throw ConfigError("horizon, max_n, R, N, n_mc, mass_radius and seed must be nonnegative");
  for (int L : Ls())
    if (L < 1) throw ConfigError("L must be >= 1");
  for (double r : doubles("rhos"))
    if (!(r > 0)) throw ConfigError("rhos must be positive");
  for (int dd : ints("dims"))
    if (dd < 1 || dd > kMaxDim) throw ConfigError("dims must lie in 1.." + std::to_string(kMaxDim));
  const auto shape = get<std::string>("shape");
  if (shape != "box" && shape != "ball") throw ConfigError("shape must be box or ball");
  try {
    tail();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  for (const auto& c : strings("campaigns")) {
    static const char* known[] = {"all",       "truncation", "l2",    "gap",       "inclusion",
                                  "gap_mass", "confinement", "decay", "martingale"};
    if (std::none_of(std::begin(known), std::end(known), [&](const char* n) { return c == n; }))
      throw ConfigError("unknown campaign '" + c + "'");
  }
}

json RunConfig::reproducible() const {
  json j = values_;
  j.erase("threads");
  j.erase("out");
  return j;
}

std::vector<int> RunConfig::Ls() const { return ints("L"); }
std::vector<double> RunConfig::doubles(const std::string& key) const { return get<std::vector<double>>(key); }
std::vector<int> RunConfig::ints(const std::string& key) const { return get<std::vector<int>>(key); }
std::vector<std::string> RunConfig::strings(const std::string& key) const {
  return get<std::vector<std::string>>(key);
}

TailSpec RunConfig::tail() const {
  const auto kind = tail_kind_from_string(get<std::string>("tail"));
  const double rho = get<double>("rho");
  auto spec = kind == TailSpec::Kind::exact ? TailSpec::exact(rho) : TailSpec::perturbed(rho, kind, get<double>("tail_c"));
  spec.validate();
  return spec;
}

ContinuumShape RunConfig::shape() const {
  const int d = get<int>("d");
  if (get<std::string>("shape") == "ball") return ContinuumShape::ball(std::vector<double>(static_cast<std::size_t>(d), 0.5), 0.5);
  return ContinuumShape::unit_box(d);
}

}  // namespace topspec::cli
