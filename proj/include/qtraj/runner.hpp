#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "qtraj/circuits.hpp"
#include "qtraj/config.hpp"
#include "qtraj/diagnostics.hpp"
#include "qtraj/mps.hpp"
#include "qtraj/unraveling.hpp"

namespace qtraj {

// Raised when a trajectory fails; carries what is needed to replay it alone.
class TrajectoryFailure : public Error {
 public:
  TrajectoryFailure(const std::string& what, std::int64_t trajectory, std::uint64_t seed)
      : Error(what), trajectory_(trajectory), seed_(seed) {}
  std::int64_t trajectory() const { return trajectory_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::int64_t trajectory_;
  std::uint64_t seed_;
};

// Circuit instance i uses a plan seed derived from (experiment seed, i).
std::vector<CircuitPlan> make_plans(const ExperimentConfig& cfg);

// requested > 0 wins, then TRAJ_WORKERS, then hardware concurrency.
int resolve_workers(int requested);

struct EnsembleRun {
  std::string strategy;
  int chi_max = 0;
  std::vector<LayerAccumulator> layers;  // layers[l]: after layer l + 1
  std::vector<CMatrix> mean_density;     // compare_dense only
  std::vector<double> dense_distance;    // compare_dense only
  std::vector<double> mean_trace;        // MPDO only
  std::uint64_t optimizer_warnings = 0;
  std::string spectra_csv;               // dump_spectra only
  double wall_seconds = 0.0;

  std::vector<EnsembleStats> stats() const;
};

using UpdateObserver = std::function<void(int layer, const UpdateRecord& rec)>;
// The state is canonical when observed; `truncation` sums the layer's gate truncations.
using LayerObserver =
    std::function<void(int layer, const TrajectoryState& state, double truncation)>;

// Evolves trajectory k on `plan` with the outcome stream (cfg.seed, k). Layers are 1-based.
TrajectoryState evolve_trajectory(const ExperimentConfig& cfg, const Unraveler& unraveler,
                                  int chi_max, const CircuitPlan& plan, std::int64_t k,
                                  const UpdateObserver& on_update, const LayerObserver& on_layer);

// Trajectory k runs on plan k mod plans.size() with the outcome stream (seed, k), so
// results do not depend on the worker count.
EnsembleRun run_trajectories(const ExperimentConfig& cfg, const UnravelingStrategy& strategy,
                             int chi_max, const std::vector<CircuitPlan>& plans);

// One MPDO evolution per circuit instance; statistics pool instances and window bonds.
EnsembleRun run_mpdo(const ExperimentConfig& cfg, int chi_max,
                     const std::vector<CircuitPlan>& plans);

struct RunManifest {
  nlohmann::json json;
  std::filesystem::path path;
  std::vector<EnsembleRun> runs;
};

// Runs the configured engine, writes CSV outputs and manifest.json into output_dir.
RunManifest run(const ExperimentConfig& cfg);

struct LadderCutoff {
  std::string strategy;
  int chi_lo = 0;
  int chi_hi = 0;
  int converged_depth = 0;  // last layer L* such that every layer <= L* agrees
};

struct ConvergenceReport {
  std::vector<int> chis;
  // converged_chi[s][l]: smallest ladder chi agreeing with the next one at layer l + 1,
  // 0 when none does.
  std::vector<std::vector<int>> converged_chi;
  std::vector<LadderCutoff> cutoffs;
  RunManifest manifest;
};

// Error bands |m1 - m2| <= se1 + se2 for both the entropy and chi_eff.
bool bands_overlap(const EnsembleStats& a, const EnsembleStats& b);

ConvergenceReport convergence_ladder(const ExperimentConfig& cfg);

struct ScalingCurve {
  std::string strategy;
  double rate = 0.0;
  std::vector<double> chi_eff;  // per layer
  std::vector<bool> masked;     // chi_eff above the hard mask
  bool area_law = false;        // chi_eff / L decreasing over the second half of depth
};

struct ScalingReport {
  std::vector<ScalingCurve> curves;
  // Per strategy: smallest swept rate from which every larger rate is area-law, NaN if none.
  std::vector<std::pair<std::string, double>> crossover;
};

ScalingReport scaling_report(const ExperimentConfig& cfg, const std::vector<double>& rates);

void write_stats_csv(const std::vector<EnsembleRun>& runs, std::ostream& out);

}  // namespace qtraj
