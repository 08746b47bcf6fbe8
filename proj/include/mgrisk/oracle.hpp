#pragma once

// Independent verification engines: Monte-Carlo CVaR and exhaustive DP on tiny instances.

#include <cstdint>
#include <vector>

#include "mgrisk/dp.hpp"
#include "mgrisk/netload.hpp"
#include "mgrisk/risk.hpp"

namespace mgrisk {

struct OracleConfig {
  std::uint64_t sample_count = 1'000'000;
  std::uint64_t rng_seed = 42;
  int action_grid_points = 9;
  int threads = 0;

  void validate() const;
  bool operator==(const OracleConfig&) const = default;
};

// SplitMix64 step (Steele, Lea, Flood 2014): state += 0x9E3779B97F4A7C15, then the
// 0xBF58476D1CE4E5B9 / 0x94D049BB133111EB finalizer. Used to derive per-batch seeds.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t tail_count = 0;  // samples with loss above the empirical VaR
  bool empty_tail = false;
};

// Empirical CVaR_alpha of |n~(b)| from `sample_count` seeded draws.
//
// Draws come in batches of 65536; batch k runs std::mt19937_64 seeded with the k-th
// splitmix64 output of rng_seed, and Gaussian variates use Box-Muller on 53-bit
// uniforms. Results are independent of thread scheduling. With v the empirical VaR,
// estimate = mean of Y_i = v + (m_i - v)^+ / (1 - alpha) and std_error = sd(Y) / sqrt(N).
McEstimate mc_cvar(const StageDistribution& net_load, double b, Band band, double alpha,
                   const OracleConfig& cfg);

struct ExhaustiveResult {
  std::vector<double> initial_costs;  // optimal total cost from every start grid state
  double best_cost = 0.0;             // min over start states
};

inline constexpr std::size_t kExhaustiveMaxStages = 4;
inline constexpr int kExhaustiveMaxActions = 15;
inline constexpr int kExhaustiveMaxStates = 7;

// Enumerates the full decision tree: every grid action at every stage and every
// interpolation branch, without memoization. Successor states are valued by the same
// piecewise-linear interpolation rule the DP applies, and actions are the
// `action_grid_points` evenly spaced rates of each state's feasible interval.
ExhaustiveResult exhaustive_dp(const ScenarioConfig& scenario, const StorageParams& params,
                               int action_grid_points, int state_points, const RiskSpec& risk);

}  // namespace mgrisk
