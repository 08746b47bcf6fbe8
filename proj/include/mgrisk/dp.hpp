#pragma once

// Backward dynamic programming over a uniform state-of-charge grid.

#include <cstddef>
#include <span>
#include <vector>

#include "mgrisk/netload.hpp"
#include "mgrisk/risk.hpp"

namespace mgrisk {

struct StorageParams {
  double s_min = 0.0;
  double s_max = 1.0;
  double leakage = 0.99;  // a: fraction of stored energy kept per stage
  double delta_t = 1.0;
  double eta_in = 1.0;
  double eta_out = 1.0;

  // s_min == s_max is accepted and models a battery with no usable capacity.
  void validate() const;
  bool operator==(const StorageParams&) const = default;
};

enum class ActionSearch {
  golden,  // bracket scan, then golden-section refinement inside the best bracket
  grid,    // bracket scan only; matches the exhaustive oracle's action grid
};

struct SolverGrid {
  int state_points = 201;
  double action_tolerance = 1e-6;
  int action_bracket_points = 9;
  ActionSearch search = ActionSearch::golden;
  int threads = 0;  // 0: one worker per hardware thread

  void validate() const;
  bool operator==(const SolverGrid&) const = default;
};

struct ActionInterval {
  double low;
  double high;
};

// Change of stored energy for rate b: eta_in * b * dt when charging, b * dt / eta_out
// when discharging.
double stored_energy_delta(double b, const StorageParams& params) noexcept;

// a * s + stored_energy_delta(b). Residue within 1e-12 of the capacity bounds is clamped;
// anything further out throws FeasibilityError.
double step_state(double s, double b, const StorageParams& params);

// Rates b for which step_state(s, b) stays within [s_min, s_max].
ActionInterval feasible_action_interval(double s, const StorageParams& params);

class StateGrid {
 public:
  StateGrid(double s_min, double s_max, int points);

  std::size_t size() const noexcept { return points_; }
  double min() const noexcept { return s_min_; }
  double max() const noexcept { return s_max_; }
  double at(std::size_t i) const noexcept;
  std::vector<double> points() const;

  // Piecewise-linear interpolation of grid samples, constant outside the grid.
  double interpolate(std::span<const double> values, double s) const;

  bool operator==(const StateGrid&) const = default;

 private:
  double s_min_;
  double s_max_;
  std::size_t points_;
  double step_;
};

// cost_to_go[t] is J over the grid for 0-based stage t; cost_to_go[T] is the zero
// terminal row. policy[t] holds the optimal rate at each grid state.
struct ValueTable {
  StateGrid grid;
  std::vector<std::vector<double>> cost_to_go;
  std::vector<std::vector<double>> policy;

  std::size_t horizon() const noexcept { return policy.size(); }
};

struct BellmanResult {
  double value;
  double action;
};

// min over feasible b of g_t(b) + J_{t+1}(step_state(s, b)), with J_{t+1} interpolated
// from `next_values` over `grid`. `stage` is 0-based.
BellmanResult bellman_value(double s, std::size_t stage, std::span<const double> next_values,
                            const StateGrid& grid, const ScenarioConfig& scenario,
                            const StorageParams& params, const SolverGrid& solver,
                            const RiskSpec& risk);

ValueTable solve(const ScenarioConfig& scenario, const StorageParams& params,
                 const SolverGrid& solver, const RiskSpec& risk);

struct InitialState {
  double state;
  double cost;
};

// Grid minimizer of J_1; ties go to the larger state.
InitialState optimal_initial_state(const ValueTable& table);

// Grid minimizer refined by a golden-section pass of the Bellman value between the
// neighbouring grid points.
InitialState optimal_initial_state(const ValueTable& table, const ScenarioConfig& scenario,
                                   const StorageParams& params, const SolverGrid& solver,
                                   const RiskSpec& risk);

}  // namespace mgrisk
