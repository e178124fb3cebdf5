#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

#include "rcquad/rare.hpp"
#include "rcquad/sampler.hpp"

namespace rcquad {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string lattice = "square";
  ModelParams params;
  std::uint64_t seed = 1;
  std::string out = "rcquad-out";
  int threads = 0;  // 0: leave the OpenMP default alone
  Schedule schedule;
  std::optional<Dynamics> dynamics;  // unset: default for q
  RareOptions rare;
  double min_hits = 10.0;
  nlohmann::json tree = nlohmann::json::object();  // validated document

  // Subcommand table, or an empty object when absent.
  const nlohmann::json& section(const std::string& name) const;
  RunOptions run_options(const BoundaryCondition& bc) const;
};

// Parses TOML text; unknown keys, wrong types and out-of-range values raise ConfigError.
RunConfig parse_config(std::string_view toml_text, const std::string& source = "config");
RunConfig load_config(const std::filesystem::path& path);

// Typed access into a section with a default; type mismatches raise ConfigError.
double get_double(const nlohmann::json& sec, const std::string& key, double dflt);
std::int64_t get_int(const nlohmann::json& sec, const std::string& key, std::int64_t dflt);
bool get_bool(const nlohmann::json& sec, const std::string& key, bool dflt);
std::string get_string(const nlohmann::json& sec, const std::string& key, const std::string& dflt);
std::vector<double> get_doubles(const nlohmann::json& sec, const std::string& key, std::vector<double> dflt);
std::vector<int> get_ints(const nlohmann::json& sec, const std::string& key, std::vector<int> dflt);

}  // namespace rcquad
