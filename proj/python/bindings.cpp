#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "mgrisk/config.hpp"
#include "mgrisk/dp.hpp"
#include "mgrisk/errors.hpp"
#include "mgrisk/netload.hpp"
#include "mgrisk/oracle.hpp"
#include "mgrisk/risk.hpp"
#include "mgrisk/sim.hpp"

namespace py = pybind11;
using namespace mgrisk;

PYBIND11_MODULE(_core, m) {
  m.doc() = "Risk-optimal battery dispatch: net-load models, CVaR stage costs, backward DP";

  py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
  py::register_exception<FeasibilityError>(m, "FeasibilityError", PyExc_ValueError);
  py::register_exception<UnsupportedModelError>(m, "UnsupportedModelError", PyExc_TypeError);
  py::register_exception<SizeError>(m, "SizeError", PyExc_ValueError);

  py::class_<Gaussian>(m, "Gaussian")
      .def(py::init<double, double>(), py::arg("mean"), py::arg("stddev"))
      .def_property_readonly("mean", &Gaussian::mean)
      .def_property_readonly("stddev", &Gaussian::stddev);
  py::class_<Empirical>(m, "Empirical")
      .def(py::init<std::vector<double>>(), py::arg("samples"))
      .def_property_readonly("samples", [](const Empirical& e) {
        auto s = e.sorted();
        return std::vector<double>(s.begin(), s.end());
      });

  py::class_<Band>(m, "Band")
      .def(py::init<double, double>(), py::arg("p_min"), py::arg("p_max"))
      .def_readwrite("p_min", &Band::p_min)
      .def_readwrite("p_max", &Band::p_max);

  m.def("aggregate", [](std::vector<double> d, std::vector<double> r) { return aggregate(d, r); },
        py::arg("loads"), py::arg("generations"));
  m.def("cdf", &cdf, py::arg("dist"), py::arg("x"));
  m.def("quantile", &quantile, py::arg("dist"), py::arg("p"));
  m.def("upper_partial_expectation", &upper_partial_expectation, py::arg("dist"), py::arg("k"));
  m.def("controller_rule", &controller_rule, py::arg("n"), py::arg("b"), py::arg("band"));

  py::class_<RiskSpec>(m, "RiskSpec")
      .def(py::init([](double alpha, double ru_tolerance, int quadrature_points) {
             RiskSpec r{alpha, ru_tolerance, quadrature_points};
             r.validate();
             return r;
           }),
           py::arg("alpha") = 0.0, py::arg("ru_tolerance") = 1e-10,
           py::arg("quadrature_points") = 256)
      .def_readwrite("alpha", &RiskSpec::alpha);

  m.def("var_alpha",
        [](const StageDistribution& d, double b, Band band, double alpha) {
          return var_alpha(CurtailmentMagnitude(d, b, band), alpha);
        },
        py::arg("dist"), py::arg("b"), py::arg("band"), py::arg("alpha"));
  m.def("stage_cost", &stage_cost, py::arg("dist"), py::arg("b"), py::arg("band"), py::arg("risk"));
  m.def("stage_cost_closed_form_alpha0", &stage_cost_closed_form_alpha0, py::arg("dist"),
        py::arg("b"), py::arg("band"));

  py::class_<StorageParams>(m, "StorageParams")
      .def(py::init([](double s_min, double s_max, double leakage, double delta_t, double eta_in,
                       double eta_out) {
             StorageParams p{s_min, s_max, leakage, delta_t, eta_in, eta_out};
             p.validate();
             return p;
           }),
           py::arg("s_min") = 0.0, py::arg("s_max") = 1.0, py::arg("leakage") = 0.99,
           py::arg("delta_t") = 1.0, py::arg("eta_in") = 1.0, py::arg("eta_out") = 1.0)
      .def_readwrite("s_min", &StorageParams::s_min)
      .def_readwrite("s_max", &StorageParams::s_max)
      .def_readwrite("leakage", &StorageParams::leakage)
      .def_readwrite("delta_t", &StorageParams::delta_t)
      .def_readwrite("eta_in", &StorageParams::eta_in)
      .def_readwrite("eta_out", &StorageParams::eta_out);

  m.def("step_state", &step_state, py::arg("s"), py::arg("b"), py::arg("params"));
  m.def("feasible_action_interval",
        [](double s, const StorageParams& p) {
          const auto iv = feasible_action_interval(s, p);
          return py::make_tuple(iv.low, iv.high);
        },
        py::arg("s"), py::arg("params"));

  py::enum_<ActionSearch>(m, "ActionSearch")
      .value("golden", ActionSearch::golden)
      .value("grid", ActionSearch::grid);
  py::class_<SolverGrid>(m, "SolverGrid")
      .def(py::init([](int state_points, double action_tolerance, int action_bracket_points,
                       ActionSearch search) {
             SolverGrid g{state_points, action_tolerance, action_bracket_points, search, 0};
             g.validate();
             return g;
           }),
           py::arg("state_points") = 201, py::arg("action_tolerance") = 1e-6,
           py::arg("action_bracket_points") = 9, py::arg("search") = ActionSearch::golden)
      .def_readwrite("state_points", &SolverGrid::state_points)
      .def_readwrite("action_tolerance", &SolverGrid::action_tolerance)
      .def_readwrite("action_bracket_points", &SolverGrid::action_bracket_points)
      .def_readwrite("search", &SolverGrid::search)
      .def_readwrite("threads", &SolverGrid::threads);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init([](std::vector<StageDistribution> stages, Band band) {
             ScenarioConfig s{std::move(stages), band};
             s.validate();
             return s;
           }),
           py::arg("stages"), py::arg("band"))
      .def_property_readonly("horizon", &ScenarioConfig::horizon);
  m.def("reference_scenario", &reference_scenario, py::arg("stddev") = 0.25);
  m.def("reference_mean_profile", &reference_mean_profile);

  py::class_<ValueTable>(m, "ValueTable")
      .def_property_readonly("states", [](const ValueTable& t) { return t.grid.points(); })
      .def_readonly("cost_to_go", &ValueTable::cost_to_go)
      .def_readonly("policy", &ValueTable::policy)
      .def_property_readonly("horizon", &ValueTable::horizon);

  m.def("solve", &solve, py::arg("scenario"), py::arg("params"), py::arg("solver"), py::arg("risk"),
        py::call_guard<py::gil_scoped_release>());
  m.def("optimal_initial_state",
        [](const ValueTable& t) {
          const auto r = optimal_initial_state(t);
          return py::make_tuple(r.state, r.cost);
        },
        py::arg("table"));
  m.def("optimal_initial_state",
        [](const ValueTable& t, const ScenarioConfig& sc, const StorageParams& p,
           const SolverGrid& g, const RiskSpec& r) {
          const auto init = optimal_initial_state(t, sc, p, g, r);
          return py::make_tuple(init.state, init.cost);
        },
        py::arg("table"), py::arg("scenario"), py::arg("params"), py::arg("solver"),
        py::arg("risk"));

  py::class_<DispatchStep>(m, "DispatchStep")
      .def_readonly("state", &DispatchStep::state)
      .def_readonly("rate", &DispatchStep::rate)
      .def_readonly("net_load", &DispatchStep::net_load)
      .def_readonly("intervention", &DispatchStep::intervention)
      .def_readonly("flow", &DispatchStep::flow)
      .def_readonly("baseline_intervention", &DispatchStep::baseline_intervention);
  py::class_<DispatchTrace>(m, "DispatchTrace")
      .def_readonly("steps", &DispatchTrace::steps)
      .def_readonly("final_state", &DispatchTrace::final_state);
  m.def("rollout",
        [](const ValueTable& t, std::vector<double> realization, double s_start,
           const ScenarioConfig& sc, const StorageParams& p) {
          return rollout(t, realization, s_start, sc, p);
        },
        py::arg("table"), py::arg("realization"), py::arg("s_start"), py::arg("scenario"),
        py::arg("params"));

  m.def("mc_cvar",
        [](const StageDistribution& d, double b, Band band, double alpha, std::uint64_t samples,
           std::uint64_t seed) {
          OracleConfig cfg;
          cfg.sample_count = samples;
          cfg.rng_seed = seed;
          const auto r = mc_cvar(d, b, band, alpha, cfg);
          return py::make_tuple(r.estimate, r.std_error);
        },
        py::arg("dist"), py::arg("b"), py::arg("band"), py::arg("alpha"),
        py::arg("samples") = 1'000'000, py::arg("seed") = 42);
  m.def("exhaustive_dp",
        [](const ScenarioConfig& sc, const StorageParams& p, int actions, int states,
           const RiskSpec& r) { return exhaustive_dp(sc, p, actions, states, r).initial_costs; },
        py::arg("scenario"), py::arg("params"), py::arg("action_grid_points"),
        py::arg("state_points"), py::arg("risk"));

  m.def("emit_config_roundtrip",
        [](const std::string& text) { return emit_config(parse_config(text)); }, py::arg("text"),
        "Parse and re-emit a config document (validates it on the way).");
}
