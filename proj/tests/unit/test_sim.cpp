#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "mgrisk/dp.hpp"
#include "mgrisk/errors.hpp"
#include "mgrisk/sim.hpp"
#include "unit/test_support.hpp"

using namespace mgrisk;

namespace {

double total_abs(const DispatchTrace& trace, bool with_battery) {
  double sum = 0.0;
  for (const auto& step : trace.steps)
    sum += std::abs(with_battery ? step.intervention : step.baseline_intervention);
  return sum;
}

}  // namespace

TEST_SUITE("sim") {
  TEST_CASE("reference profile shape") {
    const auto means = reference_mean_profile();
    REQUIRE(means.size() == 24);
    const ScenarioConfig sc = reference_scenario();
    CHECK(sc.horizon() == 24);
    CHECK(sc.band.p_min == 0.0);
    CHECK(sc.band.p_max == 0.6);
    int above = 0, below = 0;
    for (double m : means) above += m > 0.6, below += m < 0.0;
    CHECK(above >= 6);
    CHECK(below >= 4);
  }

  TEST_CASE("zero-capacity battery reproduces the no-battery baseline") {
    const ScenarioConfig sc = reference_scenario();
    StorageParams p;
    p.s_min = p.s_max = 0.0;
    SolverGrid g;
    g.state_points = 3;
    const ValueTable table = solve(sc, p, g, RiskSpec{0.01});
    const auto realization = reference_mean_profile();
    const DispatchTrace trace = rollout(table, realization, 0.0, sc, p);
    for (const auto& step : trace.steps) {
      CHECK(step.rate == 0.0);
      CHECK(step.intervention == step.baseline_intervention);
    }
  }

  TEST_CASE("in-band realization needs no intervention without a battery") {
    const ScenarioConfig sc = reference_scenario();
    SolverGrid g;
    g.state_points = 21;
    const ValueTable table = solve(sc, StorageParams{}, g, RiskSpec{0.01});
    const std::vector<double> inband(24, 0.3);
    const DispatchTrace trace = rollout(table, inband, 0.5, sc, StorageParams{});
    for (const auto& step : trace.steps) {
      CHECK(step.baseline_intervention == 0.0);
      CHECK(step.flow >= sc.band.p_min - 1e-12);
      CHECK(step.flow <= sc.band.p_max + 1e-12);
    }
  }

  TEST_CASE("battery reduces total intervention on the reference means") {
    const ScenarioConfig sc = reference_scenario();
    const RiskSpec risk{0.01};
    const ValueTable table = solve(sc, StorageParams{}, SolverGrid{}, risk);
    const auto init = optimal_initial_state(table, sc, StorageParams{}, SolverGrid{}, risk);
    const auto means = reference_mean_profile();
    const DispatchTrace trace = rollout(table, means, init.state, sc, StorageParams{});
    CHECK(total_abs(trace, true) < total_abs(trace, false));
    for (std::size_t t = 0; t < 24; ++t) {
      if (means[t] < 0.0) CHECK(trace.steps[t].rate > 0.0);
      if (means[t] > 0.75) CHECK(trace.steps[t].rate < 0.0);
    }
  }

  TEST_CASE("rollout stays feasible and the flow identity holds exactly") {
    const ScenarioConfig sc = reference_scenario();
    SolverGrid g;
    g.state_points = 31;
    StorageParams p;
    const ValueTable table = solve(sc, p, g, RiskSpec{0.2});
    auto rng = testing::make_rng(8);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> n(24);
      for (auto& x : n) x = testing::uniform(rng, -1.0, 1.5);
      const DispatchTrace trace = rollout(table, n, testing::uniform(rng, 0.0, 1.0), sc, p);
      for (std::size_t t = 0; t < 24; ++t) {
        const auto& st = trace.steps[t];
        CHECK(st.flow == st.net_load - st.intervention + st.rate);
        CHECK(st.state >= p.s_min - 1e-12);
        CHECK(st.state <= p.s_max + 1e-12);
        const double next = t + 1 < 24 ? trace.steps[t + 1].state : trace.final_state;
        CHECK(std::abs(next - (p.leakage * st.state + stored_energy_delta(st.rate, p))) <= 1e-12);
      }
    }
  }

  TEST_CASE("shed and curtail split") {
    DispatchTrace trace;
    trace.steps = {{0.5, 0.0, 0.9, 0.3, 0.6, 0.3}, {0.5, 0.0, -0.2, -0.2, 0.0, -0.2},
                   {0.5, 0.0, 0.3, 0.0, 0.3, 0.0}};
    const auto split = shed_curtail_split(trace);
    CHECK(split.shedding == std::vector<double>{0.3, 0.0, 0.0});
    CHECK(split.curtailment == std::vector<double>{0.0, 0.2, 0.0});
    for (std::size_t t = 0; t < 3; ++t) {
      CHECK(split.shedding[t] * split.curtailment[t] == 0.0);
      CHECK(split.shedding[t] - split.curtailment[t] == trace.steps[t].intervention);
    }
  }

  TEST_CASE("rollout input errors") {
    const ScenarioConfig sc = reference_scenario();
    SolverGrid g;
    g.state_points = 11;
    const ValueTable table = solve(sc, StorageParams{}, g, RiskSpec{});
    const std::vector<double> short_n(23, 0.3);
    CHECK_THROWS_AS(rollout(table, short_n, 0.5, sc, StorageParams{}), InputError);
    const std::vector<double> n(24, 0.3);
    CHECK_THROWS_AS(rollout(table, n, 1.5, sc, StorageParams{}), InputError);
    ScenarioConfig shorter = sc;
    shorter.stages.pop_back();
    CHECK_THROWS_AS(rollout(table, short_n, 0.5, shorter, StorageParams{}), InputError);
  }

  TEST_CASE("rollout is deterministic") {
    const ScenarioConfig sc = reference_scenario();
    SolverGrid g;
    g.state_points = 21;
    const ValueTable table = solve(sc, StorageParams{}, g, RiskSpec{0.01});
    const auto means = reference_mean_profile();
    const auto a = rollout(table, means, 0.7, sc, StorageParams{});
    const auto b = rollout(table, means, 0.7, sc, StorageParams{});
    REQUIRE(a.steps.size() == b.steps.size());
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
      CHECK(a.steps[t].rate == b.steps[t].rate);
      CHECK(a.steps[t].intervention == b.steps[t].intervention);
    }
    CHECK(a.final_state == b.final_state);
  }
}
