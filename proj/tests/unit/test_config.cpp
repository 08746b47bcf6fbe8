#include <doctest.h>

#include <filesystem>
#include <string>

#include "mgrisk/config.hpp"
#include "mgrisk/errors.hpp"
#include "mgrisk/sim.hpp"
#include "unit/test_support.hpp"

using namespace mgrisk;

namespace {

const std::filesystem::path kSource = MGRISK_SOURCE_DIR;

const char* kMinimal = R"({
  "schema": 1,
  "horizon": 2,
  "p_min": 0.0,
  "p_max": 0.6,
  "s_min": 0.0,
  "s_max": 1.0,
  "alpha": 0.1,
  "stages": [{"mean": 0.8, "stddev": 0.2}, {"mean": -0.1, "stddev": 0.3}]
})";

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  REQUIRE(pos != std::string::npos);
  return text.replace(pos, from.size(), to);
}

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_SUITE("config") {
  TEST_CASE("reference config matches the built-in scenario") {
    const RunConfig cfg = load_config(kSource / "configs" / "reference_24h.json");
    CHECK(cfg.scenario == reference_scenario(0.25));
    CHECK(cfg.risk.alpha == 0.01);
    CHECK(cfg.storage.leakage == 0.99);
    CHECK(cfg.solver.state_points == 201);
    CHECK(cfg.oracle.sample_count == 1'000'000);
    CHECK(cfg.oracle.rng_seed == 42);
    CHECK(cfg.realization.kind == RealizationSource::Kind::means);
  }

  TEST_CASE("tiny config") {
    const RunConfig cfg = load_config(kSource / "configs" / "tiny.json");
    CHECK(cfg.scenario.horizon() == 2);
    CHECK(std::holds_alternative<Empirical>(cfg.scenario.stages[0]));
    CHECK(cfg.solver.search == ActionSearch::grid);
    CHECK(cfg.realization.kind == RealizationSource::Kind::values);
    CHECK(cfg.realization.values == std::vector<double>{0.9, -0.3});
  }

  TEST_CASE("defaults for optional keys") {
    const RunConfig cfg = parse_config(kMinimal);
    CHECK(cfg.storage.leakage == 0.99);
    CHECK(cfg.storage.delta_t == 1.0);
    CHECK(cfg.storage.eta_in == 1.0);
    CHECK(cfg.solver.state_points == 201);
    CHECK(cfg.solver.search == ActionSearch::golden);
    CHECK(cfg.risk.ru_tolerance == 1e-10);
    CHECK_FALSE(cfg.s_start.has_value());
  }

  TEST_CASE("invalid values are rejected") {
    CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"p_max\": 0.6", "\"p_max\": 0.0")), ValidationError);
    CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"alpha\": 0.1", "\"alpha\": 1.0")), ValidationError);
    CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"stddev\": 0.2", "\"stddev\": 0.0")), ValidationError);
    CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"s_max\": 1.0", "\"s_max\": -1.0")), ValidationError);
    CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"horizon\": 2", "\"horizon\": 3")), ValidationError);
    CHECK_THROWS_AS(parse_config(replace(kMinimal, "\"schema\": 1", "\"schema\": 2")), ParseError);
    CHECK(error_of(replace(kMinimal, "\"horizon\": 2", "\"horizon\": 3")).find("horizon") != std::string::npos);
    CHECK(error_of(replace(kMinimal, "\"stddev\": 0.2", "\"stddev\": 0.0")).find("stages[0]") != std::string::npos);
  }

  TEST_CASE("structural errors name the offending key") {
    const std::string unknown = replace(kMinimal, "\"alpha\": 0.1", "\"alpha\": 0.1, \"alhpa\": 0.2");
    CHECK_THROWS_AS(parse_config(unknown), ParseError);
    CHECK(error_of(unknown).find("alhpa") != std::string::npos);

    const std::string wrong_type = replace(kMinimal, "\"alpha\": 0.1", "\"alpha\": \"high\"");
    CHECK_THROWS_AS(parse_config(wrong_type), ParseError);
    CHECK(error_of(wrong_type).find("alpha") != std::string::npos);

    const std::string both = replace(kMinimal, "{\"mean\": 0.8, \"stddev\": 0.2}",
                                     "{\"mean\": 0.8, \"stddev\": 0.2, \"samples\": [0.1]}");
    CHECK_THROWS_AS(parse_config(both), ParseError);

    const std::string missing = replace(kMinimal, "\"s_min\": 0.0,", "");
    CHECK(error_of(missing).find("s_min") != std::string::npos);

    const std::string bad_search = replace(kMinimal, "\"alpha\": 0.1", "\"alpha\": 0.1, \"action_search\": \"fast\"");
    CHECK_THROWS_AS(parse_config(bad_search), ParseError);
  }

  TEST_CASE("malformed JSON reports the position") {
    const std::string broken = replace(kMinimal, "\"s_max\": 1.0,", "\"s_max\": 1.0,,");
    CHECK_THROWS_AS(parse_config(broken), ParseError);
    CHECK(error_of(broken).find("line 7") != std::string::npos);
  }

  TEST_CASE("emit and parse round-trip") {
    RunConfig cfg = load_config(kSource / "configs" / "reference_24h.json");
    CHECK(parse_config(emit_config(cfg)) == cfg);

    RunConfig tiny = load_config(kSource / "configs" / "tiny.json");
    tiny.s_start = 0.25;
    tiny.output_dir = "out/tiny";
    CHECK(parse_config(emit_config(tiny)) == tiny);

    auto rng = testing::make_rng(4);
    for (int i = 0; i < 25; ++i) {
      RunConfig c = parse_config(kMinimal);
      c.risk.alpha = testing::uniform(rng, 0.0, 0.99);
      c.storage.leakage = testing::uniform(rng, 0.5, 1.0);
      c.storage.eta_in = testing::uniform(rng, 0.5, 1.0);
      c.scenario.band = {testing::uniform(rng, -1.0, 0.0), testing::uniform(rng, 0.1, 1.0)};
      c.scenario.stages[1] = Gaussian(testing::uniform(rng, -1.0, 1.0), testing::uniform(rng, 0.01, 1.0));
      c.solver.state_points = 2 + i;
      CHECK(parse_config(emit_config(c)) == c);
    }
  }

  TEST_CASE("parameter overrides") {
    RunConfig cfg = parse_config(kMinimal);
    apply_parameter(cfg, "alpha", 0.5);
    CHECK(cfg.risk.alpha == 0.5);
    apply_parameter(cfg, "leakage_a", 0.9);
    CHECK(cfg.storage.leakage == 0.9);
    apply_parameter(cfg, "state_points", 51);
    CHECK(cfg.solver.state_points == 51);
    apply_parameter(cfg, "stddev", 0.4);
    CHECK(std::get<Gaussian>(cfg.scenario.stages[0]).stddev() == 0.4);
    CHECK(std::get<Gaussian>(cfg.scenario.stages[1]).stddev() == 0.4);
    CHECK_THROWS_AS(apply_parameter(cfg, "alpha", 1.5), ValidationError);
    CHECK_THROWS_AS(apply_parameter(cfg, "state_points", 10.5), ValidationError);
    CHECK_THROWS_AS(apply_parameter(cfg, "colour", 1.0), ValidationError);
  }

  TEST_CASE("missing config file") {
    CHECK_THROWS_AS(load_config(kSource / "configs" / "does_not_exist.json"), IoError);
  }
}
