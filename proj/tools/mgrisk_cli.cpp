// mgrisk: risk-optimal battery dispatch for a line-limited microgrid.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mgrisk/commands.hpp"
#include "mgrisk/config.hpp"
#include "mgrisk/errors.hpp"

namespace fs = std::filesystem;
using mgrisk::ExitCode;

namespace {

int code(ExitCode c) { return static_cast<int>(c); }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const std::string item = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw mgrisk::ValidationError("--values: '" + item + "' is not a number");
    out.push_back(v);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Risk-optimal storage dispatch: solve, simulate, audit and sweep"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;

  auto* solve = app.add_subcommand("solve", "Backward DP; writes values.csv and summary.json");
  solve->add_option("--config", config_path, "Run config (JSON)")->required();
  solve->add_option("--out", out_dir, "Output directory")->required();

  std::string values_path;
  std::optional<std::string> realization;
  auto* simulate = app.add_subcommand("simulate", "Roll out the solved policy; writes trace.csv and comparison.csv");
  simulate->add_option("--config", config_path, "Run config (JSON)")->required();
  simulate->add_option("--values", values_path, "values.csv from solve")->required();
  simulate->add_option("--realization", realization, "'means' or a CSV file with column n");
  simulate->add_option("--out", out_dir, "Output directory")->required();

  std::uint64_t seed = 42;
  std::uint64_t samples = 1'000'000;
  std::optional<std::string> audit_values;
  auto* audit = app.add_subcommand("audit", "Check the solver against the Monte-Carlo and exhaustive oracles");
  audit->add_option("--config", config_path, "Run config (JSON)")->required();
  audit->add_option("--seed", seed, "RNG seed");
  audit->add_option("--samples", samples, "Monte-Carlo sample count per check");
  audit->add_option("--values", audit_values, "Optional values.csv to verify against a fresh solve");
  audit->add_option("--out", out_dir, "Output directory")->required();

  std::string param;
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Re-solve across values of one parameter; writes sweep.csv");
  sweep->add_option("--config", config_path, "Run config (JSON)")->required();
  sweep->add_option("--param", param, "Config key to vary (or 'stddev')")->required();
  sweep->add_option("--values", sweep_values, "Comma-separated values")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::validation);
  }

  try {
    const mgrisk::RunConfig config = mgrisk::load_config(config_path);
    if (*solve) {
      const auto out = mgrisk::cmd_solve(config, out_dir);
      std::cout << "s1 = " << out.initial.state << ", J1 = " << out.initial.cost << " ("
                << out.runtime_seconds << " s)\n";
    } else if (*simulate) {
      const auto trace = mgrisk::cmd_simulate(config, values_path, realization, out_dir);
      double with = 0.0;
      double without = 0.0;
      for (const auto& s : trace.steps) {
        with += std::abs(s.intervention);
        without += std::abs(s.baseline_intervention);
      }
      std::cout << "sum |n_tilde| with battery = " << with << ", without = " << without << "\n";
    } else if (*audit) {
      std::optional<fs::path> vf;
      if (audit_values) vf = *audit_values;
      const auto report = mgrisk::cmd_audit(config, seed, samples, out_dir, vf);
      for (const auto& c : report.checks)
        std::cout << c.name << ": "
                  << (c.status == mgrisk::AuditCheck::Status::pass   ? "pass"
                      : c.status == mgrisk::AuditCheck::Status::fail ? "FAIL"
                                                                     : "skip")
                  << "  " << c.detail << "\n";
      if (!report.passed()) return code(ExitCode::solver);
    } else if (*sweep) {
      const auto rows = mgrisk::cmd_sweep(config, param, parse_list(sweep_values), out_dir);
      for (const auto& r : rows)
        std::cout << param << "=" << r.value << ": s1 = " << r.initial.state
                  << ", J1 = " << r.initial.cost << "\n";
    }
  } catch (const mgrisk::InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return code(ExitCode::validation);
  } catch (const mgrisk::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return code(ExitCode::io);
  } catch (const std::exception& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return code(ExitCode::solver);
  }
  return code(ExitCode::ok);
}
