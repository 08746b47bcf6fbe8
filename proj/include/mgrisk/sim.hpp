#pragma once

// Forward simulation of one net-load realization under a solved policy.

#include <span>
#include <vector>

#include "mgrisk/dp.hpp"
#include "mgrisk/netload.hpp"

namespace mgrisk {

struct DispatchStep {
  double state;             // s_t at the start of the stage
  double rate;              // b_t
  double net_load;          // realized n_t
  double intervention;      // n~_t, signed
  double flow;              // p_t = n_t - n~_t + b_t
  double baseline_intervention;  // n~_t with no battery (b = 0)
};

struct DispatchTrace {
  std::vector<DispatchStep> steps;
  double final_state = 0.0;  // s_{T+1}
};

// Applies the grid policy, linearly interpolated in s and clamped into the feasible
// interval, at each stage.
DispatchTrace rollout(const ValueTable& table, std::span<const double> realization,
                      double s_start, const ScenarioConfig& scenario,
                      const StorageParams& params);

struct ShedCurtail {
  std::vector<double> shedding;     // (n~)^+
  std::vector<double> curtailment;  // (-n~)^+
};

ShedCurtail shed_curtail_split(const DispatchTrace& trace);

// Representative 24-hour mean net-load profile (normalized units, hour 0 = midnight):
// evening load carrying past midnight, a morning peak, a negative midday trough from
// rooftop PV and an evening peak, with the peaks above a 0.6 line limit. A hand-drawn
// representative shape, not measured data.
std::vector<double> reference_mean_profile();

// The 24-stage example: Gaussian stages around reference_mean_profile() with the
// given standard deviation and flow band [0, 0.6].
ScenarioConfig reference_scenario(double stddev = 0.25);

}  // namespace mgrisk
