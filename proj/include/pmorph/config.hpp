#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmorph/grid.hpp"
#include "pmorph/kinetics.hpp"
#include "pmorph/simulate.hpp"
#include "pmorph/vladimirov.hpp"

namespace pmorph {

// Raised for malformed configs; the message names the offending field so the
// CLI can exit with a usable diagnostic.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridSection {
  int p = 0, M = 0, L = 0;
};

struct OperatorSection {
  double alpha = 0;
  bool paper_literal_matrix = false;
  std::int64_t dense_cap = 4096;
};

struct KineticsSection {
  std::string model;
  std::map<std::string, double> params;
  double gamma = 1.0;
  double d = 1.0;
};

struct SimulationSection {
  double t_end = 0;
  double dt = 0;
  std::string scheme = "imex_euler";
  double perturbation_amplitude = 1e-2;
  std::vector<std::uint64_t> seeds{1};
  std::int64_t snapshot_stride = 1;
};

struct OutputSection {
  std::string directory = "out";
  std::string prefix;
};

// One JSON document with sections {grid, operator, kinetics, simulation,
// output}. Unknown keys are errors: a silent typo in a parameter name would
// corrupt results.
struct RunConfig {
  GridSection grid;
  std::optional<OperatorSection> op;
  std::optional<KineticsSection> kinetics;
  std::optional<SimulationSection> simulation;
  OutputSection output;
  nlohmann::ordered_json raw;  // parsed document, echoed into the manifest
};

namespace detail {

inline void reject_unknown_keys(const nlohmann::ordered_json& obj,
                                const std::string& where,
                                const std::set<std::string>& allowed) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw ConfigError("unknown key '" + where + it.key() + "'");
}

template <typename T>
T require(const nlohmann::ordered_json& obj, const std::string& where,
          const std::string& key) {
  if (!obj.contains(key))
    throw ConfigError("missing required field '" + where + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + where + key + "' has the wrong type");
  }
}

template <typename T>
T optional_or(const nlohmann::ordered_json& obj, const std::string& where,
              const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("field '" + where + key + "' has the wrong type");
  }
}

}  // namespace detail

inline RunConfig parse_config(const std::string& text) {
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
  detail::reject_unknown_keys(doc, "",
                              {"grid", "operator", "kinetics", "simulation", "output"});

  RunConfig cfg;
  cfg.raw = doc;

  if (!doc.contains("grid")) throw ConfigError("missing required section 'grid'");
  {
    const auto& g = doc.at("grid");
    detail::reject_unknown_keys(g, "grid.", {"p", "M", "L"});
    cfg.grid.p = detail::require<int>(g, "grid.", "p");
    cfg.grid.M = detail::require<int>(g, "grid.", "M");
    cfg.grid.L = detail::require<int>(g, "grid.", "L");
  }

  if (doc.contains("operator")) {
    const auto& o = doc.at("operator");
    detail::reject_unknown_keys(o, "operator.",
                                {"alpha", "paper_literal_matrix", "dense_cap"});
    OperatorSection op;
    op.alpha = detail::require<double>(o, "operator.", "alpha");
    op.paper_literal_matrix =
        detail::optional_or<bool>(o, "operator.", "paper_literal_matrix", false);
    op.dense_cap =
        detail::optional_or<std::int64_t>(o, "operator.", "dense_cap", 4096);
    cfg.op = op;
  }

  if (doc.contains("kinetics")) {
    const auto& k = doc.at("kinetics");
    detail::reject_unknown_keys(k, "kinetics.", {"model", "params", "gamma", "d"});
    KineticsSection ks;
    ks.model = detail::require<std::string>(k, "kinetics.", "model");
    ks.gamma = detail::require<double>(k, "kinetics.", "gamma");
    ks.d = detail::require<double>(k, "kinetics.", "d");
    if (k.contains("params")) {
      if (!k.at("params").is_object())
        throw ConfigError("field 'kinetics.params' must be an object");
      for (auto it = k.at("params").begin(); it != k.at("params").end(); ++it) {
        if (!it.value().is_number())
          throw ConfigError("field 'kinetics.params." + it.key() +
                            "' must be a number");
        ks.params[it.key()] = it.value().get<double>();
      }
    }
    cfg.kinetics = ks;
  }

  if (doc.contains("simulation")) {
    const auto& s = doc.at("simulation");
    detail::reject_unknown_keys(s, "simulation.",
                                {"t_end", "dt", "scheme", "perturbation_amplitude",
                                 "seed", "seeds", "snapshot_stride"});
    SimulationSection ss;
    ss.t_end = detail::require<double>(s, "simulation.", "t_end");
    ss.dt = detail::require<double>(s, "simulation.", "dt");
    ss.scheme = detail::optional_or<std::string>(s, "simulation.", "scheme",
                                                 "imex_euler");
    ss.perturbation_amplitude = detail::optional_or<double>(
        s, "simulation.", "perturbation_amplitude", 1e-2);
    ss.snapshot_stride =
        detail::optional_or<std::int64_t>(s, "simulation.", "snapshot_stride", 1);
    if (s.contains("seed") && s.contains("seeds"))
      throw ConfigError("give either 'simulation.seed' or 'simulation.seeds', not both");
    if (s.contains("seeds")) {
      if (!s.at("seeds").is_array() || s.at("seeds").empty())
        throw ConfigError("field 'simulation.seeds' must be a non-empty array");
      ss.seeds.clear();
      for (const auto& v : s.at("seeds")) {
        if (!v.is_number_unsigned() && !v.is_number_integer())
          throw ConfigError("field 'simulation.seeds' must hold integers");
        ss.seeds.push_back(v.get<std::uint64_t>());
      }
    } else {
      ss.seeds = {detail::optional_or<std::uint64_t>(s, "simulation.", "seed", 1)};
    }
    cfg.simulation = ss;
  }

  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    detail::reject_unknown_keys(o, "output.", {"directory", "prefix"});
    cfg.output.directory =
        detail::optional_or<std::string>(o, "output.", "directory", "out");
    cfg.output.prefix = detail::optional_or<std::string>(o, "output.", "prefix", "");
  }

  return cfg;
}

// -- domain objects from validated sections ---------------------------------

inline GridGeometry make_geometry(const RunConfig& cfg) {
  try {
    return GridGeometry(cfg.grid.p, cfg.grid.M, cfg.grid.L);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
}

inline OperatorOptions make_operator_options(const OperatorSection& s) {
  OperatorOptions opt;
  opt.paper_literal = s.paper_literal_matrix;
  opt.dense_cap = s.dense_cap;
  return opt;
}

// Raised when the kinetics section names an unknown model or carries unusable
// parameters (CLI exit 10).
struct KineticsError : std::runtime_error {
  explicit KineticsError(const std::string& msg) : std::runtime_error(msg) {}
};

inline KineticsModel make_kinetics(const KineticsSection& s) {
  auto param = [&](const std::string& name) {
    auto it = s.params.find(name);
    if (it == s.params.end())
      throw KineticsError("kinetics model '" + s.model + "' needs parameter '" +
                          name + "'");
    return it->second;
  };
  try {
    if (s.model == "schnakenberg")
      return make_schnakenberg(param("a"), param("b"), s.gamma, s.d);
    if (s.model == "brusselator")
      return make_brusselator(param("a"), param("b"), s.gamma, s.d);
  } catch (const KineticsError&) {
    throw;
  } catch (const std::exception& e) {
    throw KineticsError(std::string("kinetics: ") + e.what());
  }
  throw KineticsError("unknown kinetics model '" + s.model +
                      "' (schnakenberg | brusselator)");
}

}  // namespace pmorph
