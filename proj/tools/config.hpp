#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "topspec/field.hpp"
#include "topspec/lattice.hpp"

namespace topspec::cli {

/// Bad configuration; the command line maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Run configuration. Values live in a JSON object whose keys and types are fixed by defaults().
class RunConfig {
 public:
  RunConfig();

  static const nlohmann::json& defaults();
  /// JSON schema of the configuration object.
  static nlohmann::json schema();

  /// key = value lines; '#' starts a comment.
  void load_file(const std::string& path);
  void load_text(const std::string& text);
  /// Parses `value` according to the type of `key`; throws ConfigError on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);
  void validate() const;

  const nlohmann::json& values() const noexcept { return values_; }
  void assign(const nlohmann::json& values);
  /// The configuration without execution knobs (threads, out); embedded in every output file.
  nlohmann::json reproducible() const;

  template <class T>
  T get(const std::string& key) const {
    return values_.at(key).get<T>();
  }

  std::vector<int> Ls() const;
  std::vector<double> doubles(const std::string& key) const;
  std::vector<int> ints(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;
  TailSpec tail() const;
  ContinuumShape shape() const;

 private:
  nlohmann::json values_;
};

}  // namespace topspec::cli
