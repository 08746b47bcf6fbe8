#pragma once

// The solve / simulate / audit / sweep commands behind the CLI.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mgrisk/config.hpp"
#include "mgrisk/dp.hpp"
#include "mgrisk/sim.hpp"

namespace mgrisk {

// Process exit codes.
enum class ExitCode : int { ok = 0, validation = 1, solver = 2, io = 3 };

struct SolveOutcome {
  ValueTable table;
  InitialState initial;       // refined between grid points
  InitialState initial_grid;  // best grid state
  double runtime_seconds = 0.0;
};

SolveOutcome run_solve(const RunConfig& config);

// Writes values.csv and summary.json into `out_dir`.
SolveOutcome cmd_solve(const RunConfig& config, const std::filesystem::path& out_dir);

// Realization values for the config (stage means, inline list or CSV file). An explicit
// `override_source` ("means" or a CSV path) takes precedence.
std::vector<double> resolve_realization(const RunConfig& config,
                                        const std::optional<std::string>& override_source);

// Writes trace.csv and comparison.csv.
DispatchTrace cmd_simulate(const RunConfig& config, const std::filesystem::path& values_file,
                           const std::optional<std::string>& realization,
                           const std::filesystem::path& out_dir);

struct AuditCheck {
  enum class Status { pass, fail, skip };
  std::string name;
  Status status = Status::pass;
  double discrepancy = 0.0;
  std::string detail;
};

struct AuditReport {
  std::vector<AuditCheck> checks;
  bool passed() const;
};

// Monte-Carlo CVaR checks at sampled (stage, rate) pairs, the exhaustive DP check when
// the instance is small enough, and, with `values_file`, a comparison of that artifact
// against a fresh solve. Writes audit.json.
AuditReport cmd_audit(const RunConfig& config, std::uint64_t seed, std::uint64_t samples,
                      const std::filesystem::path& out_dir,
                      const std::optional<std::filesystem::path>& values_file = std::nullopt);

struct SweepRow {
  double value;
  InitialState initial;
};

// Re-solves once per value of `param`; writes sweep.csv (param, value, s1, J1).
std::vector<SweepRow> cmd_sweep(const RunConfig& config, const std::string& param,
                                std::span<const double> values,
                                const std::filesystem::path& out_dir);

}  // namespace mgrisk
