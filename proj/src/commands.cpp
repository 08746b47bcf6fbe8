#include "mgrisk/commands.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "mgrisk/errors.hpp"
#include "mgrisk/io.hpp"
#include "mgrisk/oracle.hpp"

namespace mgrisk {

namespace {

using nlohmann::ordered_json;

constexpr int kAuditMcChecks = 5;

const char* status_name(AuditCheck::Status s) {
  switch (s) {
    case AuditCheck::Status::pass: return "pass";
    case AuditCheck::Status::fail: return "fail";
    case AuditCheck::Status::skip: return "skip";
  }
  return "?";
}

// Rows of J must have nonnegative second differences up to 1e-7 * max|J|.
double worst_convexity_violation(const std::vector<double>& row) {
  double scale = 0.0;
  for (double v : row) scale = std::max(scale, std::abs(v));
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < row.size(); ++i) {
    const double second = row[i - 1] - 2.0 * row[i] + row[i + 1];
    worst = std::min(worst, second + 1e-7 * scale);
  }
  return -worst;
}

std::vector<AuditCheck> monte_carlo_checks(const RunConfig& config, std::uint64_t seed,
                                           std::uint64_t samples) {
  std::vector<AuditCheck> checks;
  const auto& scenario = config.scenario;
  if (scenario.horizon() == 0) {
    checks.push_back({"mc_cvar", AuditCheck::Status::skip, 0.0, "no stages"});
    return checks;
  }
  std::uint64_t state = seed ^ 0xA0761D6478BD642Full;
  auto unit = [&] { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; };
  const StateGrid grid(config.storage.s_min, config.storage.s_max, config.solver.state_points);

  for (int k = 0; k < kAuditMcChecks; ++k) {
    const auto t = static_cast<std::size_t>(unit() * static_cast<double>(scenario.horizon())) %
                   scenario.horizon();
    const auto node = static_cast<std::size_t>(unit() * static_cast<double>(grid.size())) %
                      grid.size();
    const ActionInterval iv = feasible_action_interval(grid.at(node), config.storage);
    const double b = iv.low + unit() * (iv.high - iv.low);

    OracleConfig oc = config.oracle;
    oc.sample_count = samples;
    oc.rng_seed = seed + static_cast<std::uint64_t>(k);
    const double analytic = stage_cost(scenario.stages[t], b, scenario.band, config.risk);
    const McEstimate mc = mc_cvar(scenario.stages[t], b, scenario.band, config.risk.alpha, oc);
    const double diff = std::abs(analytic - mc.estimate);
    const bool ok = mc.std_error > 0.0 ? diff <= 4.0 * mc.std_error : diff <= 1e-12;

    std::ostringstream detail;
    detail << "t=" << t + 1 << " b=" << format_number(b) << " analytic=" << format_number(analytic)
           << " mc=" << format_number(mc.estimate) << " se=" << format_number(mc.std_error)
           << (mc.empty_tail ? " (empty tail)" : "");
    checks.push_back({"mc_cvar[" + std::to_string(k) + "]",
                      ok ? AuditCheck::Status::pass : AuditCheck::Status::fail,
                      mc.std_error > 0.0 ? diff / mc.std_error : diff, detail.str()});
  }
  return checks;
}

AuditCheck exhaustive_check(const RunConfig& config) {
  const int actions = config.oracle.action_grid_points;
  const int states = config.solver.state_points;
  if (config.scenario.horizon() > kExhaustiveMaxStages || actions > kExhaustiveMaxActions ||
      states > kExhaustiveMaxStates) {
    std::ostringstream why;
    why << "instance too large for enumeration (T=" << config.scenario.horizon()
        << ", states=" << states << ", actions=" << actions << "; limits T<=" << kExhaustiveMaxStages
        << ", states<=" << kExhaustiveMaxStates << ", actions<=" << kExhaustiveMaxActions << ")";
    return {"exhaustive_dp", AuditCheck::Status::skip, 0.0, why.str()};
  }
  SolverGrid restricted = config.solver;
  restricted.search = ActionSearch::grid;
  restricted.action_bracket_points = actions;
  const ValueTable table = solve(config.scenario, config.storage, restricted, config.risk);
  const ExhaustiveResult oracle =
      exhaustive_dp(config.scenario, config.storage, actions, states, config.risk);
  double worst = 0.0;
  bool equal = true;
  for (std::size_t i = 0; i < oracle.initial_costs.size(); ++i) {
    worst = std::max(worst, std::abs(oracle.initial_costs[i] - table.cost_to_go[0][i]));
    equal = equal && oracle.initial_costs[i] == table.cost_to_go[0][i];
  }
  return {"exhaustive_dp", equal ? AuditCheck::Status::pass : AuditCheck::Status::fail, worst,
          "best cost " + format_number(oracle.best_cost)};
}

std::vector<AuditCheck> values_checks(const RunConfig& config,
                                      const std::filesystem::path& values_file) {
  std::vector<AuditCheck> checks;
  const ValueTable given = read_values_csv(values_file);
  const ValueTable fresh = solve(config.scenario, config.storage, config.solver, config.risk);
  if (given.horizon() != fresh.horizon() || given.grid != fresh.grid) {
    checks.push_back({"values_match", AuditCheck::Status::fail, 0.0,
                      "values artifact shape does not match config"});
    return checks;
  }
  double worst = 0.0;
  for (std::size_t t = 0; t < fresh.cost_to_go.size(); ++t)
    for (std::size_t i = 0; i < fresh.grid.size(); ++i) {
      const double ref = fresh.cost_to_go[t][i];
      worst = std::max(worst, std::abs(given.cost_to_go[t][i] - ref) / (1.0 + std::abs(ref)));
    }
  checks.push_back({"values_match", worst <= 1e-9 ? AuditCheck::Status::pass : AuditCheck::Status::fail,
                    worst, "max relative J deviation from a fresh solve"});

  double convex = 0.0;
  for (const auto& row : given.cost_to_go) convex = std::max(convex, worst_convexity_violation(row));
  checks.push_back({"values_convex", convex <= 0.0 ? AuditCheck::Status::pass : AuditCheck::Status::fail,
                    convex, "largest second-difference violation beyond 1e-7*max|J|"});

  bool feasible = true;
  for (std::size_t t = 0; t < given.horizon(); ++t)
    for (std::size_t i = 0; i < given.grid.size(); ++i) {
      const ActionInterval iv = feasible_action_interval(given.grid.at(i), config.storage);
      const double b = given.policy[t][i];
      feasible = feasible && b >= iv.low - 1e-12 && b <= iv.high + 1e-12;
    }
  checks.push_back({"policy_feasible", feasible ? AuditCheck::Status::pass : AuditCheck::Status::fail,
                    0.0, "every stored rate within its feasible interval"});
  return checks;
}

}  // namespace

SolveOutcome run_solve(const RunConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  SolveOutcome out{solve(config.scenario, config.storage, config.solver, config.risk), {}, {}, 0.0};
  out.initial_grid = optimal_initial_state(out.table);
  out.initial = optimal_initial_state(out.table, config.scenario, config.storage, config.solver,
                                      config.risk);
  out.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

SolveOutcome cmd_solve(const RunConfig& config, const std::filesystem::path& out_dir) {
  ensure_directory(out_dir);
  SolveOutcome out = run_solve(config);
  write_text(out_dir / "values.csv", values_csv(out.table));

  ordered_json summary;
  summary["s1"] = out.initial.state;
  summary["J1"] = out.initial.cost;
  summary["s1_grid"] = out.initial_grid.state;
  summary["J1_grid"] = out.initial_grid.cost;
  summary["runtime_seconds"] = out.runtime_seconds;
  summary["horizon"] = config.scenario.horizon();
  summary["alpha"] = config.risk.alpha;
  summary["grid"] = {{"state_points", config.solver.state_points},
                     {"action_tolerance", config.solver.action_tolerance},
                     {"action_bracket_points", config.solver.action_bracket_points},
                     {"action_search", config.solver.search == ActionSearch::golden ? "golden" : "grid"}};
  write_text(out_dir / "summary.json", summary.dump(2) + "\n");
  return out;
}

std::vector<double> resolve_realization(const RunConfig& config,
                                        const std::optional<std::string>& override_source) {
  RealizationSource source = config.realization;
  if (override_source) {
    source = {};
    if (*override_source == "means") {
      source.kind = RealizationSource::Kind::means;
    } else {
      source.kind = RealizationSource::Kind::file;
      source.path = *override_source;
    }
  }
  std::vector<double> values;
  switch (source.kind) {
    case RealizationSource::Kind::means:
      for (const auto& stage : config.scenario.stages) values.push_back(mean(stage));
      break;
    case RealizationSource::Kind::values: values = source.values; break;
    case RealizationSource::Kind::file: values = read_realization_csv(source.path); break;
  }
  if (values.size() != config.scenario.horizon())
    throw ValidationError("realization has " + std::to_string(values.size()) +
                          " rows, expected T=" + std::to_string(config.scenario.horizon()));
  return values;
}

DispatchTrace cmd_simulate(const RunConfig& config, const std::filesystem::path& values_file,
                           const std::optional<std::string>& realization,
                           const std::filesystem::path& out_dir) {
  config.validate();
  const ValueTable table = read_values_csv(values_file);
  const StateGrid expected(config.storage.s_min, config.storage.s_max, config.solver.state_points);
  if (table.horizon() != config.scenario.horizon())
    throw ValidationError("values artifact has horizon " + std::to_string(table.horizon()) +
                          ", config expects " + std::to_string(config.scenario.horizon()));
  if (table.grid != expected)
    throw ValidationError("values artifact state grid does not match the config");

  const std::vector<double> path = resolve_realization(config, realization);
  const double s_start =
      config.s_start ? *config.s_start
                     : (table.horizon() == 0
                            ? optimal_initial_state(table).state
                            : optimal_initial_state(table, config.scenario, config.storage,
                                                    config.solver, config.risk)
                                  .state);
  ensure_directory(out_dir);
  DispatchTrace trace = rollout(table, path, s_start, config.scenario, config.storage);
  write_text(out_dir / "trace.csv", trace_csv(trace));
  write_text(out_dir / "comparison.csv", comparison_csv(trace));
  return trace;
}

bool AuditReport::passed() const {
  for (const auto& c : checks)
    if (c.status == AuditCheck::Status::fail) return false;
  return true;
}

AuditReport cmd_audit(const RunConfig& config, std::uint64_t seed, std::uint64_t samples,
                      const std::filesystem::path& out_dir,
                      const std::optional<std::filesystem::path>& values_file) {
  config.validate();
  ensure_directory(out_dir);
  AuditReport report;
  report.checks = monte_carlo_checks(config, seed, samples);
  report.checks.push_back(exhaustive_check(config));
  if (values_file)
    for (auto& c : values_checks(config, *values_file)) report.checks.push_back(std::move(c));

  ordered_json doc;
  doc["passed"] = report.passed();
  doc["seed"] = seed;
  doc["samples"] = samples;
  ordered_json list = ordered_json::array();
  for (const auto& c : report.checks)
    list.push_back({{"name", c.name},
                    {"status", status_name(c.status)},
                    {"discrepancy", c.discrepancy},
                    {"detail", c.detail}});
  doc["checks"] = std::move(list);
  write_text(out_dir / "audit.json", doc.dump(2) + "\n");
  return report;
}

std::vector<SweepRow> cmd_sweep(const RunConfig& config, const std::string& param,
                                std::span<const double> values,
                                const std::filesystem::path& out_dir) {
  if (values.empty()) throw ValidationError("sweep needs at least one value");
  std::vector<RunConfig> variants;
  for (double v : values) {
    RunConfig c = config;
    apply_parameter(c, param, v);
    variants.push_back(std::move(c));
  }
  ensure_directory(out_dir);
  std::vector<SweepRow> rows;
  std::ostringstream csv;
  csv << "param,value,s1,J1\n";
  for (std::size_t k = 0; k < variants.size(); ++k) {
    const SolveOutcome out = run_solve(variants[k]);
    rows.push_back({values[k], out.initial});
    csv << param << ',' << format_number(values[k]) << ',' << format_number(out.initial.state) << ','
        << format_number(out.initial.cost) << '\n';
  }
  write_text(out_dir / "sweep.csv", csv.str());
  return rows;
}

}  // namespace mgrisk
