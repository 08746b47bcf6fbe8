#include "mgrisk/dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "mgrisk/errors.hpp"
#include "mgrisk/line_search.hpp"
#include "parallel.hpp"

namespace mgrisk {

namespace {

constexpr double kStateResidue = 1e-12;

double tie_tolerance(double value) { return 1e-12 * std::max(1.0, std::abs(value)); }

// Inverse of the efficiency map: the rate whose stored-energy change per unit time is `rate`.
double rate_for_energy_rate(double rate, const StorageParams& p) {
  if (rate > 0.0) return rate / p.eta_in;
  if (rate < 0.0) return rate * p.eta_out;
  return 0.0;
}

struct Candidate {
  double action;
  double value;
};

// Lowest value wins; among values within the tie tolerance of the minimum the
// smaller |b| is kept (then the smaller b for determinism). The reported value is the
// minimum itself.
BellmanResult pick(const std::vector<Candidate>& candidates) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::min(best, c.value);
  const double tol = tie_tolerance(best);
  const Candidate* chosen = nullptr;
  for (const auto& c : candidates) {
    if (c.value > best + tol) continue;
    if (!chosen || std::abs(c.action) < std::abs(chosen->action) ||
        (std::abs(c.action) == std::abs(chosen->action) && c.action < chosen->action))
      chosen = &c;
  }
  return {best, chosen->action};
}

}  // namespace

void StorageParams::validate() const {
  if (!std::isfinite(s_min) || !std::isfinite(s_max))
    throw ValidationError("capacity bounds must be finite");
  if (!(s_min >= 0.0)) throw ValidationError("s_min must be >= 0");
  if (!(s_min <= s_max)) throw ValidationError("capacity bounds require s_min <= s_max");
  if (!(leakage > 0.0 && leakage <= 1.0))
    throw ValidationError("leakage factor must satisfy 0 < a <= 1, got " + std::to_string(leakage));
  if (!(delta_t > 0.0) || !std::isfinite(delta_t))
    throw ValidationError("delta_t must be > 0");
  if (!(eta_in > 0.0 && eta_in <= 1.0)) throw ValidationError("eta_in must lie in (0, 1]");
  if (!(eta_out > 0.0 && eta_out <= 1.0)) throw ValidationError("eta_out must lie in (0, 1]");
}

void SolverGrid::validate() const {
  if (state_points < 2) throw ValidationError("state_points must be >= 2");
  if (!(action_tolerance > 0.0)) throw ValidationError("action_tolerance must be > 0");
  if (action_bracket_points < 3) throw ValidationError("action_bracket_points must be >= 3");
  if (threads < 0) throw ValidationError("threads must be >= 0");
}

double stored_energy_delta(double b, const StorageParams& params) noexcept {
  if (b > 0.0) return params.eta_in * b * params.delta_t;
  if (b < 0.0) return b / params.eta_out * params.delta_t;
  return 0.0;
}

double step_state(double s, double b, const StorageParams& params) {
  const double next = params.leakage * s + stored_energy_delta(b, params);
  if (next < params.s_min - kStateResidue || next > params.s_max + kStateResidue)
    throw FeasibilityError("rate " + std::to_string(b) + " at state " + std::to_string(s) +
                           " leaves the capacity bounds (next state " + std::to_string(next) + ")");
  return std::clamp(next, params.s_min, params.s_max);
}

ActionInterval feasible_action_interval(double s, const StorageParams& params) {
  if (!(s >= params.s_min - kStateResidue && s <= params.s_max + kStateResidue))
    throw InputError("state " + std::to_string(s) + " outside capacity bounds [" +
                     std::to_string(params.s_min) + ", " + std::to_string(params.s_max) + "]");
  const double kept = params.leakage * s;
  const double low = rate_for_energy_rate((params.s_min - kept) / params.delta_t, params);
  const double high = rate_for_energy_rate((params.s_max - kept) / params.delta_t, params);
  return {low, std::max(low, high)};
}

StateGrid::StateGrid(double s_min, double s_max, int points)
    : s_min_(s_min), s_max_(s_max), points_(static_cast<std::size_t>(std::max(points, 0))),
      step_(0.0) {
  if (points < 2) throw ValidationError("state grid needs at least 2 points");
  if (!(s_min <= s_max)) throw ValidationError("state grid requires s_min <= s_max");
  step_ = (s_max - s_min) / static_cast<double>(points_ - 1);
}

double StateGrid::at(std::size_t i) const noexcept {
  if (i + 1 >= points_) return s_max_;
  return s_min_ + step_ * static_cast<double>(i);
}

std::vector<double> StateGrid::points() const {
  std::vector<double> out(points_);
  for (std::size_t i = 0; i < points_; ++i) out[i] = at(i);
  return out;
}

double StateGrid::interpolate(std::span<const double> values, double s) const {
  if (values.size() != points_) throw InputError("interpolation row does not match the grid");
  if (step_ <= 0.0) return values[0];
  const double pos = (s - s_min_) / step_;
  if (pos <= 0.0) return values[0];
  const double last = static_cast<double>(points_ - 1);
  if (pos >= last) return values[points_ - 1];
  std::size_t j = static_cast<std::size_t>(std::floor(pos));
  if (j >= points_ - 1) j = points_ - 2;
  const double w = pos - static_cast<double>(j);
  return (1.0 - w) * values[j] + w * values[j + 1];
}

BellmanResult bellman_value(double s, std::size_t stage, std::span<const double> next_values,
                            const StateGrid& grid, const ScenarioConfig& scenario,
                            const StorageParams& params, const SolverGrid& solver,
                            const RiskSpec& risk) {
  if (stage >= scenario.horizon())
    throw InputError("stage " + std::to_string(stage) + " beyond horizon " +
                     std::to_string(scenario.horizon()));
  const StageDistribution& net_load = scenario.stages[stage];
  const ActionInterval iv = feasible_action_interval(s, params);

  auto total = [&](double b) {
    return stage_cost(net_load, b, scenario.band, risk) +
           grid.interpolate(next_values, step_state(s, b, params));
  };

  if (!(iv.high > iv.low)) return {total(iv.low), iv.low};

  const int k_points = solver.action_bracket_points;
  std::vector<Candidate> candidates;
  candidates.reserve(static_cast<std::size_t>(k_points) + 2);
  for (int k = 0; k < k_points; ++k) {
    const double b = k == k_points - 1
                         ? iv.high
                         : iv.low + (iv.high - iv.low) * static_cast<double>(k) /
                                        static_cast<double>(k_points - 1);
    candidates.push_back({b, total(b)});
  }

  if (solver.search == ActionSearch::golden) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < candidates.size(); ++k)
      if (candidates[k].value < candidates[best].value) best = k;
    const double lo = candidates[best == 0 ? 0 : best - 1].action;
    const double hi = candidates[std::min(best + 1, candidates.size() - 1)].action;
    const auto refined = golden_section_minimize(total, lo, hi, solver.action_tolerance);
    candidates.push_back({refined.x, refined.value});
    if (iv.low <= 0.0 && 0.0 <= iv.high) candidates.push_back({0.0, total(0.0)});
  }
  return pick(candidates);
}

ValueTable solve(const ScenarioConfig& scenario, const StorageParams& params,
                 const SolverGrid& solver, const RiskSpec& risk) {
  scenario.validate();
  params.validate();
  solver.validate();
  risk.validate();

  const std::size_t horizon = scenario.horizon();
  ValueTable table{StateGrid(params.s_min, params.s_max, solver.state_points), {}, {}};
  const std::size_t n = table.grid.size();
  table.cost_to_go.assign(horizon + 1, std::vector<double>(n, 0.0));
  table.policy.assign(horizon, std::vector<double>(n, 0.0));
  const std::vector<double> states = table.grid.points();

  for (std::size_t t = horizon; t-- > 0;) {
    const std::span<const double> next = table.cost_to_go[t + 1];
    auto& row = table.cost_to_go[t];
    auto& actions = table.policy[t];
    detail::parallel_for(n, solver.threads, [&](std::size_t i) {
      const auto r = bellman_value(states[i], t, next, table.grid, scenario, params, solver, risk);
      row[i] = r.value;
      actions[i] = r.action;
    });
  }
  return table;
}

InitialState optimal_initial_state(const ValueTable& table) {
  const auto& row = table.cost_to_go.front();
  const double best = *std::min_element(row.begin(), row.end());
  const double tol = tie_tolerance(best);
  std::size_t chosen = 0;
  for (std::size_t i = 0; i < row.size(); ++i)
    if (row[i] <= best + tol) chosen = i;
  return {table.grid.at(chosen), row[chosen]};
}

InitialState optimal_initial_state(const ValueTable& table, const ScenarioConfig& scenario,
                                   const StorageParams& params, const SolverGrid& solver,
                                   const RiskSpec& risk) {
  const InitialState coarse = optimal_initial_state(table);
  if (table.horizon() == 0 || table.grid.max() <= table.grid.min()) return coarse;

  const auto& row = table.cost_to_go.front();
  const auto& grid = table.grid;
  std::size_t i = 0;
  while (i + 1 < grid.size() && grid.at(i) < coarse.state) ++i;

  std::vector<InitialState> candidates;
  const std::size_t lo_i = i == 0 ? 0 : i - 1;
  const std::size_t hi_i = std::min(i + 1, grid.size() - 1);
  for (std::size_t k = lo_i; k <= hi_i; ++k) candidates.push_back({grid.at(k), row[k]});

  auto value = [&](double s) {
    return bellman_value(s, 0, table.cost_to_go[1], grid, scenario, params, solver, risk).value;
  };
  const auto refined =
      golden_section_minimize(value, grid.at(lo_i), grid.at(hi_i), solver.action_tolerance);
  candidates.push_back({refined.x, refined.value});

  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : candidates) best = std::min(best, c.cost);
  const double tol = tie_tolerance(best);
  const InitialState* chosen = nullptr;
  for (const auto& c : candidates)
    if (c.cost <= best + tol && (!chosen || c.state > chosen->state)) chosen = &c;
  return *chosen;
}

}  // namespace mgrisk
