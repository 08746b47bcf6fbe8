#pragma once

// Run configuration: a JSON document with a versioned `schema` field.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mgrisk/dp.hpp"
#include "mgrisk/netload.hpp"
#include "mgrisk/oracle.hpp"
#include "mgrisk/risk.hpp"

namespace mgrisk {

inline constexpr int kConfigSchema = 1;

struct RealizationSource {
  enum class Kind { means, values, file };
  Kind kind = Kind::means;
  std::vector<double> values;  // Kind::values
  std::string path;            // Kind::file

  bool operator==(const RealizationSource&) const = default;
};

struct RunConfig {
  ScenarioConfig scenario;
  StorageParams storage;
  RiskSpec risk;
  SolverGrid solver;
  OracleConfig oracle;
  RealizationSource realization;
  std::optional<double> s_start;
  std::string output_dir;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

// Throws ParseError for malformed documents or unknown keys and ValidationError when a
// value breaks an invariant.
RunConfig parse_config(std::string_view text);

// Reads a config file; a relative realization file path is resolved against the
// config's directory.
RunConfig load_config(const std::filesystem::path& path);

std::string emit_config(const RunConfig& config);

// Overrides one numeric setting by its config key (plus `stddev`, applied to every
// Gaussian stage) and revalidates. Used by `sweep`.
void apply_parameter(RunConfig& config, std::string_view name, double value);

}  // namespace mgrisk
