#include "mgrisk/sim.hpp"

#include <algorithm>
#include <string>

#include "mgrisk/errors.hpp"
#include "mgrisk/risk.hpp"

namespace mgrisk {

DispatchTrace rollout(const ValueTable& table, std::span<const double> realization,
                      double s_start, const ScenarioConfig& scenario,
                      const StorageParams& params) {
  const std::size_t horizon = scenario.horizon();
  if (realization.size() != horizon)
    throw InputError("realization has " + std::to_string(realization.size()) +
                     " values, expected " + std::to_string(horizon));
  if (table.horizon() != horizon)
    throw InputError("value table horizon " + std::to_string(table.horizon()) +
                     " does not match scenario horizon " + std::to_string(horizon));
  if (!(s_start >= params.s_min && s_start <= params.s_max))
    throw InputError("start state " + std::to_string(s_start) + " outside capacity bounds");

  DispatchTrace trace;
  trace.steps.reserve(horizon);
  double s = s_start;
  for (std::size_t t = 0; t < horizon; ++t) {
    const ActionInterval iv = feasible_action_interval(s, params);
    const double b = std::clamp(table.grid.interpolate(table.policy[t], s), iv.low, iv.high);
    const double n = realization[t];
    const double n_tilde = controller_rule(n, b, scenario.band);
    trace.steps.push_back({s, b, n, n_tilde, n - n_tilde + b, controller_rule(n, 0.0, scenario.band)});
    s = step_state(s, b, params);
  }
  trace.final_state = s;
  return trace;
}

ShedCurtail shed_curtail_split(const DispatchTrace& trace) {
  ShedCurtail out;
  out.shedding.reserve(trace.steps.size());
  out.curtailment.reserve(trace.steps.size());
  for (const auto& step : trace.steps) {
    out.shedding.push_back(std::max(step.intervention, 0.0));
    out.curtailment.push_back(std::max(-step.intervention, 0.0));
  }
  return out;
}

std::vector<double> reference_mean_profile() {
  return {0.72, 0.66, 0.58, 0.52, 0.50, 0.56, 0.70, 0.82, 0.74, 0.46, 0.14, -0.12,
          -0.28, -0.36, -0.32, -0.20, 0.04, 0.38, 0.78, 0.92, 0.90, 0.84, 0.76, 0.70};
}

ScenarioConfig reference_scenario(double stddev) {
  ScenarioConfig scenario;
  scenario.band = {0.0, 0.6};
  for (double m : reference_mean_profile()) scenario.stages.emplace_back(Gaussian(m, stddev));
  return scenario;
}

}  // namespace mgrisk
