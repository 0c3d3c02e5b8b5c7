#include "qtraj/runner.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "qtraj/io.hpp"
#include "qtraj/mpdo.hpp"
#include "qtraj/mps.hpp"
#include "qtraj/oracle.hpp"

namespace qtraj {
namespace {

constexpr std::uint64_t kPlanStream = 0xC1C0;
constexpr std::uint64_t kTrajectoryStream = 0x7A1;
constexpr int kChunk = 16;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs task(i) for i in [0, count) on a pool and feeds results to merge() in index
// order, so the reduction is independent of scheduling.
template <typename R>
void parallel_ordered(int count, int workers, const std::function<R(int)>& task,
                      const std::function<void(R&&)>& merge) {
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::mutex mu;
  std::vector<std::optional<R>> done(count);
  int merged = 0;
  std::exception_ptr error;
  int error_index = std::numeric_limits<int>::max();

  auto body = [&] {
    for (int i = next++; i < count && !failed; i = next++) {
      try {
        R r = task(i);
        std::lock_guard lock(mu);
        done[i] = std::move(r);
        while (merged < count && done[merged]) {
          merge(std::move(*done[merged]));
          done[merged].reset();
          ++merged;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
        failed = true;
      }
    }
  };
  const int w = std::max(1, std::min(workers, count));
  if (w == 1) {
    body();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(body);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

AggregateOptions aggregate_options(const ExperimentConfig& cfg) {
  AggregateOptions o;
  o.epsilon = cfg.epsilon;
  return o;
}

std::vector<LayerAccumulator> empty_layers(const ExperimentConfig& cfg) {
  return std::vector<LayerAccumulator>(cfg.layers, LayerAccumulator(aggregate_options(cfg)));
}

// Visits gates in the order that keeps the orthogonality center travelling one way.
template <typename Fn>
void for_each_gate(const std::vector<GateOp>& layer, bool reverse, Fn&& fn) {
  if (reverse) {
    for (auto it = layer.rbegin(); it != layer.rend(); ++it) fn(*it);
  } else {
    for (const auto& g : layer) fn(g);
  }
}

struct TrajectoryChunk {
  std::vector<LayerAccumulator> layers;
  std::vector<CMatrix> rho;
  std::uint64_t warnings = 0;
  std::string spectra_csv;
};

std::string csv_row(std::initializer_list<std::string> cells) {
  std::string s;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) s += ',';
    s += c;
    first = false;
  }
  s += '\n';
  return s;
}

std::string stats_csv(const std::vector<EnsembleRun>& runs) {
  std::ostringstream out;
  write_stats_csv(runs, out);
  return out.str();
}

std::string histogram_csv(const Histogram& h) {
  std::ostringstream out;
  h.write_csv(out);
  return out.str();
}

}  // namespace

std::vector<EnsembleStats> EnsembleRun::stats() const {
  std::vector<EnsembleStats> s;
  s.reserve(layers.size());
  for (const auto& l : layers) s.push_back(l.finalize());
  return s;
}

std::vector<CircuitPlan> make_plans(const ExperimentConfig& cfg) {
  std::vector<CircuitPlan> plans;
  for (int i = 0; i < cfg.circuit_instances; ++i) {
    const std::uint64_t seed = mix64(mix64(cfg.seed ^ kPlanStream) + static_cast<std::uint64_t>(i));
    plans.push_back(brickwork(cfg.n, cfg.layers, seed));
  }
  return plans;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("TRAJ_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

TrajectoryState evolve_trajectory(const ExperimentConfig& cfg, const Unraveler& unraveler,
                                  int chi_max, const CircuitPlan& plan, std::int64_t k,
                                  const UpdateObserver& on_update, const LayerObserver& on_layer) {
  const int n = cfg.n;
  TrajectoryState st = product_state(cfg.bits(), chi_max, cfg.svd_floor);
  CounterRng rng = CounterRng::stream(cfg.seed, kTrajectoryStream, static_cast<std::uint64_t>(k));
  for (int l = 0; l < cfg.layers; ++l) {
    double trunc = 0.0;
    const bool from_right = st.chain().center() >= n / 2;
    for_each_gate(plan.gates[l], from_right, [&](const GateOp& g) {
      trunc += apply_two_qubit_gate(st, g.unitary, g.site);
    });
    const bool noise_from_right = st.chain().center() >= n / 2;
    for (int i = 0; i < n; ++i) {
      const int q = noise_from_right ? n - 1 - i : i;
      const UpdateRecord rec = unraveler.update(st, q, rng, l + 1);
      if (on_update) on_update(l + 1, rec);
    }
    st.canonicalize();
    if (on_layer) on_layer(l + 1, st, trunc);
  }
  return st;
}

EnsembleRun run_trajectories(const ExperimentConfig& cfg, const UnravelingStrategy& strategy,
                             int chi_max, const std::vector<CircuitPlan>& plans) {
  cfg.validate();
  if (plans.empty()) throw ConfigError("no circuit plans");
  const auto t0 = Clock::now();
  const Unraveler unraveler(cfg.noise.make(), strategy);
  const auto [first_bond, bond_count] = bond_window(cfg.n, cfg.bond_window);
  const int n = cfg.n;

  EnsembleRun total;
  total.strategy = strategy_name(strategy);
  total.chi_max = chi_max;
  total.layers = empty_layers(cfg);
  if (cfg.compare_dense) {
    const Eigen::Index dim = Eigen::Index{1} << n;
    total.mean_density.assign(cfg.layers, CMatrix::Zero(dim, dim));
  }

  auto simulate = [&](std::int64_t k, TrajectoryChunk& out) {
    const CircuitPlan& plan = plans[k % static_cast<std::int64_t>(plans.size())];
    TrajectoryState st = evolve_trajectory(
        cfg, unraveler, chi_max, plan, k,
        [&](int layer, const UpdateRecord& rec) {
          out.layers[layer - 1].add_update(rec);
          if (rec.optimizer_warning) ++out.warnings;
        },
        [&](int layer, const TrajectoryState& s, double trunc) {
          auto& acc = out.layers[layer - 1];
          for (int b = first_bond; b < first_bond + bond_count; ++b) {
            acc.add_spectrum(schmidt_spectrum(s, b));
          }
          acc.add_truncation(trunc);
          if (cfg.compare_dense) {
            const CVector psi = to_dense(s);
            out.rho[layer - 1] += psi * psi.adjoint();
          }
        });
    if (cfg.dump_spectra && k == 0) {
      std::ostringstream s;
      write_spectra_csv(st, s);
      out.spectra_csv = s.str();
    }
  };

  const std::int64_t nt = cfg.trajectories;
  const int chunks = static_cast<int>((nt + kChunk - 1) / kChunk);
  std::function<TrajectoryChunk(int)> task = [&](int c) {
    TrajectoryChunk ch;
    ch.layers = empty_layers(cfg);
    if (cfg.compare_dense) {
      const Eigen::Index dim = Eigen::Index{1} << n;
      ch.rho.assign(cfg.layers, CMatrix::Zero(dim, dim));
    }
    const std::int64_t lo = static_cast<std::int64_t>(c) * kChunk;
    const std::int64_t hi = std::min<std::int64_t>(nt, lo + kChunk);
    for (std::int64_t k = lo; k < hi; ++k) {
      try {
        simulate(k, ch);
      } catch (const std::exception& e) {
        throw TrajectoryFailure("trajectory " + std::to_string(k) + " failed: " + e.what(), k,
                                cfg.seed);
      }
    }
    return ch;
  };
  std::function<void(TrajectoryChunk&&)> merge = [&](TrajectoryChunk&& ch) {
    for (int l = 0; l < cfg.layers; ++l) {
      total.layers[l].merge(ch.layers[l]);
      if (cfg.compare_dense) total.mean_density[l] += ch.rho[l];
    }
    total.optimizer_warnings += ch.warnings;
    if (!ch.spectra_csv.empty()) total.spectra_csv = std::move(ch.spectra_csv);
  };
  parallel_ordered(chunks, resolve_workers(cfg.workers), task, merge);

  if (cfg.compare_dense) {
    for (auto& rho : total.mean_density) rho /= static_cast<double>(nt);
    if (plans.size() != 1) {
      throw ConfigError("compare_dense needs circuit_instances = 1");
    }
    const auto exact = evolve_density(plans[0], cfg.noise.make(), cfg.bits());
    for (int l = 0; l < cfg.layers; ++l) {
      total.dense_distance.push_back(trace_distance(total.mean_density[l], exact[l]));
    }
  }
  total.wall_seconds = seconds_since(t0);
  return total;
}

EnsembleRun run_mpdo(const ExperimentConfig& cfg, int chi_max,
                     const std::vector<CircuitPlan>& plans) {
  cfg.validate();
  const auto t0 = Clock::now();
  const RMatrix channel = channel_superop(cfg.noise.make());
  const std::string bits = cfg.bits();
  const auto [first_bond, bond_count] = bond_window(cfg.n, cfg.bond_window);
  const int n = cfg.n;

  struct Instance {
    std::vector<LayerAccumulator> layers;
    std::vector<double> trace;
  };
  EnsembleRun total;
  total.strategy = "mpdo";
  total.chi_max = chi_max;
  total.layers = empty_layers(cfg);
  total.mean_trace.assign(cfg.layers, 0.0);

  std::function<Instance(int)> task = [&](int i) {
    Instance out{empty_layers(cfg), std::vector<double>(cfg.layers, 0.0)};
    MpdoState rho = mpdo_from_bitstring(bits, chi_max, cfg.svd_floor);
    rho.set_renormalize_trace(cfg.renormalize_trace);
    const CircuitPlan& plan = plans[i];
    for (int l = 0; l < cfg.layers; ++l) {
      double trunc = 0.0;
      const bool from_right = rho.chain().center() >= n / 2;
      for_each_gate(plan.gates[l], from_right, [&](const GateOp& g) {
        trunc += rho.apply_gate(gate_superop(g.unitary), g.site);
      });
      const bool noise_from_right = rho.chain().center() >= n / 2;
      for (int k = 0; k < n; ++k) rho.apply_channel(channel, noise_from_right ? n - 1 - k : k);
      rho.canonicalize();
      for (int b = first_bond; b < first_bond + bond_count; ++b) {
        out.layers[l].add_spectrum(mpdo_spectrum(rho, b));
      }
      out.layers[l].add_truncation(trunc);
      out.trace[l] = rho.trace();
    }
    return out;
  };
  std::function<void(Instance&&)> merge = [&](Instance&& in) {
    for (int l = 0; l < cfg.layers; ++l) {
      total.layers[l].merge(in.layers[l]);
      total.mean_trace[l] += in.trace[l] / static_cast<double>(plans.size());
    }
  };
  parallel_ordered(static_cast<int>(plans.size()), resolve_workers(cfg.workers), task, merge);
  total.wall_seconds = seconds_since(t0);
  return total;
}

void write_stats_csv(const std::vector<EnsembleRun>& runs, std::ostream& out) {
  out << "layer,strategy,te_mean,te_se,chi_eff_mean,chi_eff_se,trunc_max\n";
  for (const auto& r : runs) {
    const auto stats = r.stats();
    for (std::size_t l = 0; l < stats.size(); ++l) {
      const auto& s = stats[l];
      out << csv_row({std::to_string(l + 1), r.strategy, format_double(s.entropy.mean),
                      format_double(s.entropy.se), format_double(s.chi_eff.mean),
                      format_double(s.chi_eff.se), format_double(s.trunc_max)});
    }
  }
}

namespace {

nlohmann::json manifest_base(const ExperimentConfig& cfg) {
  nlohmann::json j;
  j["version"] = QTRAJ_VERSION;
  j["config"] = cfg.to_json();
  j["files"] = nlohmann::json::array();
  return j;
}

void emit(const std::filesystem::path& dir, const std::string& name, const std::string& content,
          nlohmann::json& manifest) {
  write_file_atomic(dir / name, content);
  manifest["files"].push_back(name);
}

void record_run(const EnsembleRun& r, nlohmann::json& manifest) {
  const std::string key = r.strategy + "@chi" + std::to_string(r.chi_max);
  manifest["wall_seconds"][key] = r.wall_seconds;
  manifest["optimizer_warnings"][key] = r.optimizer_warnings;
  std::uint64_t violations = 0;
  for (const auto& l : r.layers) violations += l.finalize().chebyshev_violations;
  manifest["chebyshev_violations"][key] = violations;
}

void emit_run_files(const std::filesystem::path& dir, const EnsembleRun& r,
                    nlohmann::json& manifest) {
  const EnsembleStats last = r.layers.back().finalize();
  emit(dir, "hist_chi_eff_" + r.strategy + ".csv", histogram_csv(last.chi_eff_hist), manifest);
  if (r.strategy != "mpdo" && r.strategy != "naive") {
    emit(dir, "hist_theta_" + r.strategy + ".csv", histogram_csv(last.theta_hist), manifest);
    emit(dir, "hist_phi_" + r.strategy + ".csv", histogram_csv(last.phi_hist), manifest);
  }
  if (!r.spectra_csv.empty()) emit(dir, "spectra_" + r.strategy + ".csv", r.spectra_csv, manifest);
}

void finish_manifest(RunManifest& m, const std::filesystem::path& dir, Clock::time_point t0) {
  m.json["wall_seconds_total"] = seconds_since(t0);
  m.path = dir / "manifest.json";
  write_file_atomic(m.path, m.json.dump(2) + "\n");
}

}  // namespace

RunManifest run(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = Clock::now();
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  RunManifest m;
  m.json = manifest_base(cfg);
  const auto plans = make_plans(cfg);

  if (cfg.engine == Engine::dense) {
    std::string csv = "layer,instance,trace,purity\n";
    const KrausSet ks = cfg.noise.make();
    for (std::size_t i = 0; i < plans.size(); ++i) {
      const auto rhos = evolve_density(plans[i], ks, cfg.bits());
      for (std::size_t l = 0; l < rhos.size(); ++l) {
        csv += csv_row({std::to_string(l + 1), std::to_string(i),
                        format_double(rhos[l].trace().real()),
                        format_double((rhos[l] * rhos[l]).trace().real())});
      }
    }
    emit(dir, "dense.csv", csv, m.json);
    finish_manifest(m, dir, t0);
    return m;
  }

  if (cfg.engine == Engine::mpdo) {
    m.runs.push_back(run_mpdo(cfg, cfg.chi_max(), plans));
    std::string trace_csv = "layer,trace_mean\n";
    for (std::size_t l = 0; l < m.runs[0].mean_trace.size(); ++l) {
      trace_csv += csv_row({std::to_string(l + 1), format_double(m.runs[0].mean_trace[l])});
    }
    emit(dir, "mpdo_trace.csv", trace_csv, m.json);
  } else {
    for (const auto& s : cfg.unravelings) {
      try {
        m.runs.push_back(run_trajectories(cfg, s, cfg.chi_max(), plans));
      } catch (const TrajectoryFailure& f) {
        nlohmann::json fail{{"strategy", strategy_name(s)},
                            {"trajectory", f.trajectory()},
                            {"seed", f.seed()},
                            {"error", f.what()}};
        write_file_atomic(dir / "failure.json", fail.dump(2) + "\n");
        throw;
      }
    }
  }
  emit(dir, "stats.csv", stats_csv(m.runs), m.json);
  for (const auto& r : m.runs) {
    emit_run_files(dir, r, m.json);
    record_run(r, m.json);
  }
  if (cfg.compare_dense) {
    std::string csv = "layer,strategy,trace_distance\n";
    for (const auto& r : m.runs)
      for (std::size_t l = 0; l < r.dense_distance.size(); ++l)
        csv += csv_row({std::to_string(l + 1), r.strategy, format_double(r.dense_distance[l])});
    emit(dir, "dense_check.csv", csv, m.json);
  }
  finish_manifest(m, dir, t0);
  return m;
}

bool bands_overlap(const EnsembleStats& a, const EnsembleStats& b) {
  auto ok = [](const MeanSe& x, const MeanSe& y) {
    const double slack = 1e-12 * std::max(1.0, std::abs(x.mean));
    return std::abs(x.mean - y.mean) <= x.se + y.se + slack;
  };
  return ok(a.entropy, b.entropy) && ok(a.chi_eff, b.chi_eff);
}

ConvergenceReport convergence_ladder(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.chi_ladder.size() < 2) throw ConfigError("convergence ladder needs at least two chi values");
  if (cfg.engine != Engine::trajectories) throw ConfigError("convergence ladder runs trajectories");
  const auto t0 = Clock::now();
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  ConvergenceReport rep;
  rep.chis = cfg.chi_ladder;
  rep.manifest.json = manifest_base(cfg);
  const auto plans = make_plans(cfg);

  std::string conv_csv = "strategy,layer,converged_chi\n";
  std::string cut_csv = "strategy,chi_lo,chi_hi,converged_depth\n";
  for (const auto& s : cfg.unravelings) {
    std::vector<std::vector<EnsembleStats>> per_chi;
    for (int chi : cfg.chi_ladder) {
      EnsembleRun r = run_trajectories(cfg, s, chi, plans);
      per_chi.push_back(r.stats());
      record_run(r, rep.manifest.json);
      rep.manifest.runs.push_back(std::move(r));
    }
    const std::string name = strategy_name(s);
    std::vector<int> conv(cfg.layers, 0);
    for (int l = 0; l < cfg.layers; ++l) {
      for (std::size_t k = 0; k + 1 < per_chi.size(); ++k) {
        if (bands_overlap(per_chi[k][l], per_chi[k + 1][l])) {
          conv[l] = cfg.chi_ladder[k];
          break;
        }
      }
      conv_csv += csv_row({name, std::to_string(l + 1), std::to_string(conv[l])});
    }
    for (std::size_t k = 0; k + 1 < per_chi.size(); ++k) {
      int depth = 0;
      while (depth < cfg.layers && bands_overlap(per_chi[k][depth], per_chi[k + 1][depth])) ++depth;
      rep.cutoffs.push_back({name, cfg.chi_ladder[k], cfg.chi_ladder[k + 1], depth});
      cut_csv += csv_row({name, std::to_string(cfg.chi_ladder[k]),
                          std::to_string(cfg.chi_ladder[k + 1]), std::to_string(depth)});
    }
    rep.converged_chi.push_back(conv);
    rep.manifest.json["convergence"][name] = conv;
  }
  for (int chi : cfg.chi_ladder) {
    std::vector<EnsembleRun> at_chi;
    for (const auto& r : rep.manifest.runs)
      if (r.chi_max == chi) at_chi.push_back(r);
    emit(dir, "stats_chi" + std::to_string(chi) + ".csv", stats_csv(at_chi), rep.manifest.json);
  }
  emit(dir, "convergence.csv", conv_csv, rep.manifest.json);
  emit(dir, "cutoff.csv", cut_csv, rep.manifest.json);
  finish_manifest(rep.manifest, dir, t0);
  return rep;
}

ScalingReport scaling_report(const ExperimentConfig& cfg, const std::vector<double>& rates) {
  cfg.validate();
  if (rates.empty()) throw ConfigError("scaling report needs at least one rate");
  const auto t0 = Clock::now();
  const std::filesystem::path dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  RunManifest m;
  m.json = manifest_base(cfg);
  const auto plans = make_plans(cfg);
  ScalingReport rep;
  std::string csv = "strategy,rate,layer,inv_layer,chi_eff_over_layer,masked\n";
  std::string summary = "strategy,rate,area_law\n";
  for (const auto& s : cfg.unravelings) {
    const std::string name = strategy_name(s);
    std::vector<bool> area(rates.size(), false);
    for (std::size_t ri = 0; ri < rates.size(); ++ri) {
      ExperimentConfig c = cfg;
      c.noise.rate = rates[ri];
      const EnsembleRun r = run_trajectories(c, s, c.chi_max(), plans);
      record_run(r, m.json);
      ScalingCurve curve{name, rates[ri], {}, {}, false};
      bool any_masked = false;
      for (const auto& st : r.stats()) {
        curve.chi_eff.push_back(st.chi_eff.mean);
        curve.masked.push_back(st.chi_eff.mean > cfg.hard_mask);
        any_masked = any_masked || curve.masked.back();
      }
      const int last = cfg.layers;
      const int half = (cfg.layers + 1) / 2;
      curve.area_law = !any_masked && cfg.layers >= 2 &&
                       curve.chi_eff[last - 1] / last < curve.chi_eff[half - 1] / half;
      area[ri] = curve.area_law;
      for (int l = 0; l < cfg.layers; ++l) {
        csv += csv_row({name, format_double(rates[ri]), std::to_string(l + 1),
                        format_double(1.0 / (l + 1)), format_double(curve.chi_eff[l] / (l + 1)),
                        curve.masked[l] ? "1" : "0"});
      }
      summary += csv_row({name, format_double(rates[ri]), curve.area_law ? "1" : "0"});
      rep.curves.push_back(std::move(curve));
    }
    // Rates are taken in ascending order for the crossover.
    std::vector<std::size_t> order(rates.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return rates[a] < rates[b]; });
    double pc = std::numeric_limits<double>::quiet_NaN();
    for (auto it = order.rbegin(); it != order.rend() && area[*it]; ++it) pc = rates[*it];
    rep.crossover.emplace_back(name, pc);
    m.json["crossover"][name] = std::isnan(pc) ? nlohmann::json(nullptr) : nlohmann::json(pc);
  }
  emit(dir, "scaling.csv", csv, m.json);
  emit(dir, "scaling_summary.csv", summary, m.json);
  finish_manifest(m, dir, t0);
  return rep;
}

}  // namespace qtraj
