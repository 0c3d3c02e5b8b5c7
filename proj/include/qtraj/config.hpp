#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtraj/channels.hpp"
#include "qtraj/unraveling.hpp"

namespace qtraj {

enum class Engine { trajectories, mpdo, dense };

std::string_view to_string(Engine e);
Engine parse_engine(std::string_view name);

struct ChannelSpec {
  ChannelKind kind = ChannelKind::amplitude_damping;
  double rate = 0.1;

  KrausSet make() const { return make_channel(kind, rate); }
};

// Experiment description. JSON keys mirror the field names; unknown keys are rejected.
struct ExperimentConfig {
  int n = 16;
  int layers = 40;
  ChannelSpec noise;
  std::vector<UnravelingStrategy> unravelings{NumuUnraveling{}};
  int trajectories = 500;  // total, assigned round-robin to circuit instances
  std::vector<int> chi_ladder{64};
  double epsilon = 1e-4;
  int bond_window = 21;
  int circuit_instances = 10;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  Engine engine = Engine::trajectories;
  std::string initial_state;  // empty: all zeros
  int workers = 0;            // 0: TRAJ_WORKERS or hardware concurrency
  double svd_floor = 1e-12;
  double hard_mask = 100.0;   // chi_eff above this is outside the trusted regime
  bool compare_dense = false; // trajectory-averaged rho vs exact evolution, n <= 6
  bool dump_spectra = false;  // final-layer spectra of trajectory 0
  bool renormalize_trace = false;

  void validate() const;
  std::string bits() const { return initial_state.empty() ? std::string(n, '0') : initial_state; }
  int chi_max() const { return chi_ladder.back(); }

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

ExperimentConfig load_config(const std::string& path);

UnravelingStrategy strategy_from_json(const nlohmann::json& j);
nlohmann::json strategy_to_json(const UnravelingStrategy& s);
ChannelSpec channel_from_json(const nlohmann::json& j);
nlohmann::json channel_to_json(const ChannelSpec& c);

}  // namespace qtraj
