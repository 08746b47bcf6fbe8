#include "mgrisk/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mgrisk/errors.hpp"

namespace mgrisk {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

const std::set<std::string, std::less<>> kTopLevelKeys = {
    "schema",      "horizon",      "p_min",         "p_max",
    "s_min",       "s_max",        "leakage_a",     "delta_t",
    "eta_in",      "eta_out",      "alpha",         "ru_tolerance",
    "quadrature_points", "stages", "state_points",  "action_tolerance",
    "action_bracket_points", "action_search", "threads", "realization",
    "s_start",     "oracle",       "output_dir",
};
const std::set<std::string, std::less<>> kStageKeys = {"mean", "stddev", "samples"};
const std::set<std::string, std::less<>> kOracleKeys = {"samples", "seed", "action_grid_points",
                                                        "threads"};

void reject_unknown(const json& obj, const std::set<std::string, std::less<>>& allowed,
                    const std::string& where) {
  for (const auto& [key, _] : obj.items())
    if (!allowed.contains(key))
      throw ParseError("unknown key '" + where + key + "'");
}

const json& require(const json& obj, const std::string& key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError("missing required key '" + key + "'");
  return *it;
}

double as_number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ParseError("field '" + field + "': expected a number");
  return v.get<double>();
}

std::int64_t as_integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ParseError("field '" + field + "': expected an integer");
  return v.get<std::int64_t>();
}

std::uint64_t as_unsigned(const json& v, const std::string& field) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() &&
                                 v.get<std::int64_t>() < 0))
    throw ParseError("field '" + field + "': expected a non-negative integer");
  return v.get<std::uint64_t>();
}

int as_int(const json& v, const std::string& field) {
  const auto x = as_integer(v, field);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw ParseError("field '" + field + "': integer out of range");
  return static_cast<int>(x);
}

std::vector<double> number_list(const json& v, const std::string& field) {
  if (!v.is_array()) throw ParseError("field '" + field + "': expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

template <typename T>
void read_optional(const json& obj, const std::string& key, T& target,
                   T (*convert)(const json&, const std::string&)) {
  if (auto it = obj.find(key); it != obj.end()) target = convert(*it, key);
}

StageDistribution parse_stage(const json& v, std::size_t index) {
  const std::string where = "stages[" + std::to_string(index) + "]";
  if (!v.is_object()) throw ParseError("field '" + where + "': expected an object");
  reject_unknown(v, kStageKeys, where + ".");
  const bool gaussian = v.contains("mean") || v.contains("stddev");
  if (gaussian && v.contains("samples"))
    throw ParseError("field '" + where + "': use either mean/stddev or samples, not both");
  try {
    if (v.contains("samples")) return Empirical(number_list(v["samples"], where + ".samples"));
    if (!gaussian) throw ParseError("field '" + where + "': needs mean/stddev or samples");
    const double m = as_number(require(v, "mean"), where + ".mean");
    const double sd = as_number(require(v, "stddev"), where + ".stddev");
    return Gaussian(m, sd);
  } catch (const ParseError&) {
    throw;
  } catch (const InputError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

std::string position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

ordered_json stage_to_json(const StageDistribution& dist) {
  ordered_json out;
  if (const auto* g = std::get_if<Gaussian>(&dist)) {
    out["mean"] = g->mean();
    out["stddev"] = g->stddev();
  } else {
    const auto s = std::get<Empirical>(dist).sorted();
    out["samples"] = std::vector<double>(s.begin(), s.end());
  }
  return out;
}

}  // namespace

void RunConfig::validate() const {
  scenario.validate();
  storage.validate();
  risk.validate();
  solver.validate();
  oracle.validate();
  if (realization.kind == RealizationSource::Kind::values &&
      realization.values.size() != scenario.horizon())
    throw ValidationError("realization has " + std::to_string(realization.values.size()) +
                          " values, expected horizon " + std::to_string(scenario.horizon()));
  if (s_start && !(*s_start >= storage.s_min && *s_start <= storage.s_max))
    throw ValidationError("s_start must lie within [s_min, s_max]");
}

RunConfig parse_config(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError("malformed config at " + position_of(text, e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ParseError("config must be a JSON object");
  reject_unknown(doc, kTopLevelKeys, "");

  const auto schema = as_integer(require(doc, "schema"), "schema");
  if (schema != kConfigSchema)
    throw ParseError("unsupported schema " + std::to_string(schema) + " (expected " +
                     std::to_string(kConfigSchema) + ")");

  RunConfig cfg;
  const auto horizon = as_integer(require(doc, "horizon"), "horizon");
  if (horizon < 0) throw ValidationError("horizon must be >= 0");
  cfg.scenario.band.p_min = as_number(require(doc, "p_min"), "p_min");
  cfg.scenario.band.p_max = as_number(require(doc, "p_max"), "p_max");
  cfg.storage.s_min = as_number(require(doc, "s_min"), "s_min");
  cfg.storage.s_max = as_number(require(doc, "s_max"), "s_max");
  cfg.risk.alpha = as_number(require(doc, "alpha"), "alpha");
  read_optional(doc, "leakage_a", cfg.storage.leakage, as_number);
  read_optional(doc, "delta_t", cfg.storage.delta_t, as_number);
  read_optional(doc, "eta_in", cfg.storage.eta_in, as_number);
  read_optional(doc, "eta_out", cfg.storage.eta_out, as_number);
  read_optional(doc, "ru_tolerance", cfg.risk.ru_tolerance, as_number);
  read_optional(doc, "quadrature_points", cfg.risk.quadrature_points, as_int);
  read_optional(doc, "state_points", cfg.solver.state_points, as_int);
  read_optional(doc, "action_tolerance", cfg.solver.action_tolerance, as_number);
  read_optional(doc, "action_bracket_points", cfg.solver.action_bracket_points, as_int);
  read_optional(doc, "threads", cfg.solver.threads, as_int);
  if (auto it = doc.find("action_search"); it != doc.end()) {
    if (*it == "golden")
      cfg.solver.search = ActionSearch::golden;
    else if (*it == "grid")
      cfg.solver.search = ActionSearch::grid;
    else
      throw ParseError("field 'action_search': expected \"golden\" or \"grid\"");
  }

  const json& stages = require(doc, "stages");
  if (!stages.is_array()) throw ParseError("field 'stages': expected an array");
  for (std::size_t i = 0; i < stages.size(); ++i)
    cfg.scenario.stages.push_back(parse_stage(stages[i], i));
  if (static_cast<std::size_t>(horizon) != cfg.scenario.stages.size())
    throw ValidationError("horizon is " + std::to_string(horizon) + " but " +
                          std::to_string(cfg.scenario.stages.size()) + " stages are listed");

  if (auto it = doc.find("realization"); it != doc.end()) {
    if (it->is_string()) {
      const auto s = it->get<std::string>();
      if (s == "means") {
        cfg.realization.kind = RealizationSource::Kind::means;
      } else {
        cfg.realization.kind = RealizationSource::Kind::file;
        cfg.realization.path = s;
      }
    } else if (it->is_array()) {
      cfg.realization.kind = RealizationSource::Kind::values;
      cfg.realization.values = number_list(*it, "realization");
    } else {
      throw ParseError("field 'realization': expected \"means\", a file path or a list");
    }
  }
  if (auto it = doc.find("s_start"); it != doc.end()) cfg.s_start = as_number(*it, "s_start");
  if (auto it = doc.find("output_dir"); it != doc.end()) {
    if (!it->is_string()) throw ParseError("field 'output_dir': expected a string");
    cfg.output_dir = it->get<std::string>();
  }
  if (auto it = doc.find("oracle"); it != doc.end()) {
    if (!it->is_object()) throw ParseError("field 'oracle': expected an object");
    reject_unknown(*it, kOracleKeys, "oracle.");
    read_optional(*it, "samples", cfg.oracle.sample_count, as_unsigned);
    read_optional(*it, "seed", cfg.oracle.rng_seed, as_unsigned);
    read_optional(*it, "action_grid_points", cfg.oracle.action_grid_points, as_int);
    read_optional(*it, "threads", cfg.oracle.threads, as_int);
  }

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  RunConfig cfg = parse_config(buf.str());
  if (cfg.realization.kind == RealizationSource::Kind::file) {
    std::filesystem::path p(cfg.realization.path);
    if (p.is_relative()) cfg.realization.path = (path.parent_path() / p).string();
  }
  return cfg;
}

std::string emit_config(const RunConfig& c) {
  ordered_json doc;
  doc["schema"] = kConfigSchema;
  doc["horizon"] = c.scenario.horizon();
  doc["p_min"] = c.scenario.band.p_min;
  doc["p_max"] = c.scenario.band.p_max;
  doc["s_min"] = c.storage.s_min;
  doc["s_max"] = c.storage.s_max;
  doc["leakage_a"] = c.storage.leakage;
  doc["delta_t"] = c.storage.delta_t;
  doc["eta_in"] = c.storage.eta_in;
  doc["eta_out"] = c.storage.eta_out;
  doc["alpha"] = c.risk.alpha;
  doc["ru_tolerance"] = c.risk.ru_tolerance;
  doc["quadrature_points"] = c.risk.quadrature_points;
  doc["state_points"] = c.solver.state_points;
  doc["action_tolerance"] = c.solver.action_tolerance;
  doc["action_bracket_points"] = c.solver.action_bracket_points;
  doc["action_search"] = c.solver.search == ActionSearch::golden ? "golden" : "grid";
  doc["threads"] = c.solver.threads;
  ordered_json stages = ordered_json::array();
  for (const auto& s : c.scenario.stages) stages.push_back(stage_to_json(s));
  doc["stages"] = std::move(stages);
  switch (c.realization.kind) {
    case RealizationSource::Kind::means: doc["realization"] = "means"; break;
    case RealizationSource::Kind::values: doc["realization"] = c.realization.values; break;
    case RealizationSource::Kind::file: doc["realization"] = c.realization.path; break;
  }
  if (c.s_start) doc["s_start"] = *c.s_start;
  if (!c.output_dir.empty()) doc["output_dir"] = c.output_dir;
  doc["oracle"] = {{"samples", c.oracle.sample_count},
                   {"seed", c.oracle.rng_seed},
                   {"action_grid_points", c.oracle.action_grid_points},
                   {"threads", c.oracle.threads}};
  return doc.dump(2) + "\n";
}

void apply_parameter(RunConfig& c, std::string_view name, double value) {
  auto integral = [&](int& target) {
    if (value != std::floor(value)) throw ValidationError(std::string(name) + " must be an integer");
    target = static_cast<int>(value);
  };
  if (name == "alpha") c.risk.alpha = value;
  else if (name == "p_min") c.scenario.band.p_min = value;
  else if (name == "p_max") c.scenario.band.p_max = value;
  else if (name == "s_min") c.storage.s_min = value;
  else if (name == "s_max") c.storage.s_max = value;
  else if (name == "leakage_a") c.storage.leakage = value;
  else if (name == "delta_t") c.storage.delta_t = value;
  else if (name == "eta_in") c.storage.eta_in = value;
  else if (name == "eta_out") c.storage.eta_out = value;
  else if (name == "ru_tolerance") c.risk.ru_tolerance = value;
  else if (name == "action_tolerance") c.solver.action_tolerance = value;
  else if (name == "state_points") integral(c.solver.state_points);
  else if (name == "action_bracket_points") integral(c.solver.action_bracket_points);
  else if (name == "stddev") {
    for (auto& stage : c.scenario.stages) {
      if (auto* g = std::get_if<Gaussian>(&stage)) {
        try {
          *g = Gaussian(g->mean(), value);
        } catch (const InputError& e) {
          throw ValidationError(e.what());
        }
      }
    }
  } else {
    throw ValidationError("unknown sweep parameter '" + std::string(name) + "'");
  }
  c.validate();
}

}  // namespace mgrisk
