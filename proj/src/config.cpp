#include "qtraj/config.hpp"

#include <fstream>
#include <set>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

using nlohmann::json;

void reject_unknown(const json& j, const std::set<std::string>& allowed, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + " must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(std::string("unknown key '") + key + "' in " + what);
  }
}

template <typename T>
T get(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

OptimizerConfig optimizer_from_json(const json& j) {
  OptimizerConfig o;
  o.max_iters = get(j, "max_iters", o.max_iters);
  o.restarts = get(j, "restarts", o.restarts);
  o.grad_step = get(j, "grad_step", o.grad_step);
  o.tol = get(j, "tol", o.tol);
  if (j.contains("grid_seeds")) {
    o.grid_seeds.clear();
    for (const auto& s : j.at("grid_seeds")) {
      if (!s.is_array() || s.size() != 2) throw ConfigError("grid seed must be [theta, phi]");
      o.grid_seeds.push_back({s[0].get<double>(), s[1].get<double>()});
    }
  }
  try {
    o.validate();
  } catch (const ValidationError& e) {
    throw ConfigError(e.what());
  }
  return o;
}

void optimizer_to_json(const OptimizerConfig& o, json& j) {
  j["max_iters"] = o.max_iters;
  j["restarts"] = o.restarts;
  j["grad_step"] = o.grad_step;
  j["tol"] = o.tol;
  auto seeds = json::array();
  for (const auto& s : o.grid_seeds) seeds.push_back({s.theta, s.phi});
  j["grid_seeds"] = seeds;
}

EntropyBond parse_bond(const std::string& s) {
  if (s == "left") return EntropyBond::left;
  if (s == "right") return EntropyBond::right;
  if (s == "both") return EntropyBond::both;
  throw ConfigError("bond must be left, right or both");
}

const char* bond_name(EntropyBond b) {
  switch (b) {
    case EntropyBond::left: return "left";
    case EntropyBond::right: return "right";
    case EntropyBond::both: return "both";
  }
  return "both";
}

}  // namespace

std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::trajectories: return "trajectories";
    case Engine::mpdo: return "mpdo";
    case Engine::dense: return "dense";
  }
  return "trajectories";
}

Engine parse_engine(std::string_view name) {
  if (name == "trajectories") return Engine::trajectories;
  if (name == "mpdo") return Engine::mpdo;
  if (name == "dense") return Engine::dense;
  throw ConfigError("unknown engine '" + std::string(name) + "'");
}

UnravelingStrategy strategy_from_json(const json& j) {
  if (!j.is_object() || !j.contains("strategy")) throw ConfigError("unraveling needs a 'strategy'");
  const std::string kind = j.at("strategy").get<std::string>();
  if (kind == "naive") {
    reject_unknown(j, {"strategy"}, "naive unraveling");
    return NaiveUnraveling{};
  }
  if (kind == "fixed") {
    reject_unknown(j, {"strategy", "theta", "phi"}, "fixed unraveling");
    if (!j.contains("theta")) throw ConfigError("fixed unraveling needs 'theta'");
    return FixedUnraveling{{j.at("theta").get<double>(), get(j, "phi", 0.0)}};
  }
  const std::set<std::string> opt_keys{"strategy", "max_iters", "restarts", "grad_step", "tol",
                                       "grid_seeds"};
  if (kind == "numu") {
    reject_unknown(j, opt_keys, "numu unraveling");
    return NumuUnraveling{optimizer_from_json(j)};
  }
  if (kind == "geo2") {
    auto keys = opt_keys;
    keys.insert("bond");
    reject_unknown(j, keys, "geo2 unraveling");
    return Geo2Unraveling{optimizer_from_json(j), parse_bond(get<std::string>(j, "bond", "both"))};
  }
  throw ConfigError("unknown strategy '" + kind + "'");
}

json strategy_to_json(const UnravelingStrategy& s) {
  json j;
  j["strategy"] = strategy_name(s);
  if (const auto* f = std::get_if<FixedUnraveling>(&s)) {
    j["theta"] = f->angles.theta;
    j["phi"] = f->angles.phi;
  } else if (const auto* u = std::get_if<NumuUnraveling>(&s)) {
    optimizer_to_json(u->optimizer, j);
  } else if (const auto* g = std::get_if<Geo2Unraveling>(&s)) {
    optimizer_to_json(g->optimizer, j);
    j["bond"] = bond_name(g->bond);
  }
  return j;
}

ChannelSpec channel_from_json(const json& j) {
  reject_unknown(j, {"channel", "rate"}, "noise");
  if (!j.contains("channel") || !j.contains("rate")) throw ConfigError("noise needs channel and rate");
  ChannelSpec c;
  try {
    c.kind = parse_channel_kind(j.at("channel").get<std::string>());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.rate = j.at("rate").get<double>();
  return c;
}

json channel_to_json(const ChannelSpec& c) {
  return {{"channel", std::string(to_string(c.kind))}, {"rate", c.rate}};
}

void ExperimentConfig::validate() const {
  if (n < 2) throw ConfigError("n must be >= 2");
  if (layers < 1) throw ConfigError("layers must be >= 1");
  if (trajectories < 1) throw ConfigError("trajectories must be >= 1");
  if (chi_ladder.empty()) throw ConfigError("chi ladder is empty");
  for (std::size_t k = 0; k < chi_ladder.size(); ++k) {
    if (chi_ladder[k] < 1) throw ConfigError("chi must be >= 1");
    if (k > 0 && chi_ladder[k] <= chi_ladder[k - 1]) throw ConfigError("chi ladder must increase");
  }
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw ConfigError("epsilon must lie in (0, 1)");
  if (bond_window < 1) throw ConfigError("bond_window must be >= 1");
  if (circuit_instances < 1) throw ConfigError("circuit_instances must be >= 1");
  if (unravelings.empty()) throw ConfigError("no unraveling strategy given");
  if (!initial_state.empty() && static_cast<int>(initial_state.size()) != n) {
    throw ConfigError("initial_state length must equal n");
  }
  if (initial_state.find_first_not_of("01") != std::string::npos) {
    throw ConfigError("initial_state must contain only 0 and 1");
  }
  if (!(noise.rate >= 0.0 && noise.rate <= 1.0)) throw ConfigError("rate outside [0, 1]");
  if (compare_dense && n > 6) throw ConfigError("compare_dense needs n <= 6");
  if (engine == Engine::dense && n > 6) throw ConfigError("dense engine needs n <= 6");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"n", "layers", "noise", "unraveling", "trajectories", "chi_max", "chi_ladder",
                  "epsilon", "bond_window", "circuit_instances", "seed", "output_dir", "engine",
                  "initial_state", "workers", "svd_floor", "hard_mask", "compare_dense",
                  "dump_spectra", "renormalize_trace"},
                 "experiment config");
  ExperimentConfig c;
  c.n = get(j, "n", c.n);
  c.layers = get(j, "layers", c.layers);
  if (j.contains("noise")) c.noise = channel_from_json(j.at("noise"));
  if (j.contains("unraveling")) {
    c.unravelings.clear();
    const auto& u = j.at("unraveling");
    if (u.is_array()) {
      for (const auto& s : u) c.unravelings.push_back(strategy_from_json(s));
    } else {
      c.unravelings.push_back(strategy_from_json(u));
    }
  }
  c.trajectories = get(j, "trajectories", c.trajectories);
  if (j.contains("chi_max") && j.contains("chi_ladder")) {
    throw ConfigError("give either chi_max or chi_ladder");
  }
  if (j.contains("chi_max")) c.chi_ladder = {j.at("chi_max").get<int>()};
  if (j.contains("chi_ladder")) c.chi_ladder = j.at("chi_ladder").get<std::vector<int>>();
  c.epsilon = get(j, "epsilon", c.epsilon);
  c.bond_window = get(j, "bond_window", c.bond_window);
  c.circuit_instances = get(j, "circuit_instances", c.circuit_instances);
  c.seed = get(j, "seed", c.seed);
  c.output_dir = get(j, "output_dir", c.output_dir);
  if (j.contains("engine")) c.engine = parse_engine(j.at("engine").get<std::string>());
  c.initial_state = get(j, "initial_state", c.initial_state);
  c.workers = get(j, "workers", c.workers);
  c.svd_floor = get(j, "svd_floor", c.svd_floor);
  c.hard_mask = get(j, "hard_mask", c.hard_mask);
  c.compare_dense = get(j, "compare_dense", c.compare_dense);
  c.dump_spectra = get(j, "dump_spectra", c.dump_spectra);
  c.renormalize_trace = get(j, "renormalize_trace", c.renormalize_trace);
  c.validate();
  return c;
}

json ExperimentConfig::to_json() const {
  json j;
  j["n"] = n;
  j["layers"] = layers;
  j["noise"] = channel_to_json(noise);
  auto u = json::array();
  for (const auto& s : unravelings) u.push_back(strategy_to_json(s));
  j["unraveling"] = u;
  j["trajectories"] = trajectories;
  j["chi_ladder"] = chi_ladder;
  j["epsilon"] = epsilon;
  j["bond_window"] = bond_window;
  j["circuit_instances"] = circuit_instances;
  j["seed"] = seed;
  j["output_dir"] = output_dir;
  j["engine"] = std::string(to_string(engine));
  j["initial_state"] = initial_state;
  j["workers"] = workers;
  j["svd_floor"] = svd_floor;
  j["hard_mask"] = hard_mask;
  j["compare_dense"] = compare_dense;
  j["dump_spectra"] = dump_spectra;
  j["renormalize_trace"] = renormalize_trace;
  return j;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  return ExperimentConfig::from_json(j);
}

}  // namespace qtraj
