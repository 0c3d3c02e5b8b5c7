// Acceptance suite: one PASS/FAIL line per criterion. Always exits 0 so ctest records the
// report; the lines themselves are the verdict.
//
// QTRAJ_ACCEPT_FULL=1 runs criterion 5 at full size even when the pilot projects it past
// its time budget.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "qtraj/channels.hpp"
#include "qtraj/circuits.hpp"
#include "qtraj/config.hpp"
#include "qtraj/diagnostics.hpp"
#include "qtraj/mpdo.hpp"
#include "qtraj/mps.hpp"
#include "qtraj/optimizer.hpp"
#include "qtraj/oracle.hpp"
#include "qtraj/rng.hpp"
#include "qtraj/runner.hpp"
#include "qtraj/unraveling.hpp"

namespace {

using namespace qtraj;
using Clock = std::chrono::steady_clock;

// Pinned tolerances and budgets.
constexpr double kC1TraceDistance = 0.03;
constexpr double kC1Budget = 300.0;
constexpr double kC2Tol = 1e-10;
constexpr double kC2Budget = 60.0;
constexpr double kC3AngleTol = 1e-4;
constexpr double kC4SpreadRatio = 0.10;
constexpr double kC4Budget = 600.0;
constexpr double kC5Budget = 3600.0;
constexpr double kC6Epsilon = 1e-4;
constexpr double kC8MinR2 = 0.8;
constexpr double kC9ModeHalfWidth = kPi / 16;
constexpr double kC9MinDip = 0.20;
constexpr double kC10DenseTol = 1e-8;
constexpr double kC10FinalChiEff = 1.1;
constexpr double kC10PlateauDrift = 0.25;
constexpr double kC12NumuGrowth = 2.5;
constexpr double kC12GateGrowth = 4.0;

int g_pass = 0, g_fail = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void report(int id, bool pass, const std::string& title, const std::string& detail) {
  (pass ? g_pass : g_fail)++;
  std::cout << "C" << std::setw(2) << std::setfill('0') << id << std::setfill(' ')
            << (pass ? " PASS " : " FAIL ") << title << " | " << detail << std::endl;
}

template <typename... Args>
std::string fmt(Args&&... args) {
  std::ostringstream s;
  s << std::setprecision(4);
  (s << ... << args);
  return s.str();
}

void guarded(int id, const std::string& title, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    report(id, false, title, std::string("exception: ") + e.what());
  }
}

ExperimentConfig base_config(int n, int layers, ChannelKind kind, double rate, int trajectories,
                             int chi, std::uint64_t seed) {
  ExperimentConfig c;
  c.n = n;
  c.layers = layers;
  c.noise = ChannelSpec{kind, rate};
  c.trajectories = trajectories;
  c.chi_ladder = {chi};
  c.seed = seed;
  c.circuit_instances = 1;
  return c;
}

// Trajectory ensemble with saturated-layer pooling, built from evolve_trajectory.
struct Ensemble {
  LayerAccumulator all;
  LayerAccumulator saturated;   // layers >= first_saturated
  std::vector<double> chi_eff;  // saturated samples, one per (trajectory, layer, bond)
  double seconds = 0.0;
};

Ensemble run_ensemble(const ExperimentConfig& cfg, const UnravelingStrategy& s,
                      int first_saturated) {
  const auto t0 = Clock::now();
  const Unraveler u(cfg.noise.make(), s);
  const auto plans = make_plans(cfg);
  const auto [first_bond, bond_count] = bond_window(cfg.n, cfg.bond_window);
  AggregateOptions opts;
  opts.epsilon = cfg.epsilon;
  Ensemble e{LayerAccumulator(opts), LayerAccumulator(opts), {}, 0.0};
  for (std::int64_t k = 0; k < cfg.trajectories; ++k) {
    const CircuitPlan& plan = plans[k % static_cast<std::int64_t>(plans.size())];
    evolve_trajectory(
        cfg, u, cfg.chi_max(), plan, k,
        [&](int layer, const UpdateRecord& rec) {
          if (layer >= first_saturated) e.saturated.add_update(rec);
        },
        [&](int layer, const TrajectoryState& st, double) {
          for (int b = first_bond; b < first_bond + bond_count; ++b) {
            const auto p = schmidt_spectrum(st, b);
            e.all.add_spectrum(p);
            if (layer >= first_saturated) {
              e.saturated.add_spectrum(p);
              e.chi_eff.push_back(effective_rank(p, cfg.epsilon).chi_eff);
            }
          }
        });
  }
  e.seconds = seconds_since(t0);
  return e;
}

UnravelingStrategy fixed_pi4() { return FixedUnraveling{{kPi / 4, 0.0}}; }

// ---------------------------------------------------------------------------------------

void criterion1() {
  const auto t0 = Clock::now();
  ExperimentConfig cfg = base_config(5, 6, ChannelKind::amplitude_damping, 0.3, 20000, 32, 101);
  cfg.compare_dense = true;
  cfg.bond_window = 4;
  const auto plans = make_plans(cfg);
  double worst = 0.0;
  std::string per;
  for (const auto& s : {UnravelingStrategy{NaiveUnraveling{}}, fixed_pi4(),
                        UnravelingStrategy{NumuUnraveling{}}, UnravelingStrategy{Geo2Unraveling{}}}) {
    const EnsembleRun r = run_trajectories(cfg, s, cfg.chi_max(), plans);
    const double d = *std::max_element(r.dense_distance.begin(), r.dense_distance.end());
    worst = std::max(worst, d);
    per += fmt(strategy_name(s), "=", d, " ");
  }
  const double t = seconds_since(t0);
  report(1, worst <= kC1TraceDistance && t <= kC1Budget,
         "n=5 L=6 AD 0.3, 20000 trajectories per strategy vs dense density",
         fmt("max trace distance ", per, "(limit ", kC1TraceDistance, "), ", t, " s (limit ",
             kC1Budget, " s)"));
}

void criterion2() {
  const auto t0 = Clock::now();
  CounterRng rng(0xACC2);
  double worst_dense = 0.0, worst_pauli = 0.0;
  int checked = 0;
  for (int i = 0; i < 500; ++i) {
    const int n = 2 + static_cast<int>(rng.uniform() * 7);  // 2..8
    const DenseState psi = DenseState::random(n, rng);
    const int site = static_cast<int>(rng.uniform() * n);
    const RotationAngles a{rng.uniform() * kPi, (rng.uniform() - 0.5) * kPi};
    const double rate = 0.02 + 0.46 * rng.uniform();
    for (ChannelKind kind : {ChannelKind::amplitude_damping, ChannelKind::phase_flip}) {
      const KrausSet ks = make_channel(kind, rate);
      TrajectoryState st = from_dense(psi.amplitudes(), n, 1 << n);
      const double cost = numu_cost(a, overlaps(st, ks, site), trace_tensor(ks));
      const double dense = npc_dense(psi, rotate(ks, a), site);
      worst_dense = std::max(worst_dense, std::abs(cost + dense));
      if (kind == ChannelKind::phase_flip) {
        const Mat2 rho = psi.reduced_qubit(site);
        const double z = (rho(0, 0) - rho(1, 1)).real();
        worst_pauli = std::max(worst_pauli, std::abs(cost + npc_pauli_analytic(a, rate, z)));
      }
      ++checked;
    }
  }
  const double t = seconds_since(t0);
  report(2, worst_dense <= kC2Tol && worst_pauli <= kC2Tol && t <= kC2Budget,
         "numu_cost vs dense N_pc and the phase-flip closed form",
         fmt(checked, " cases, max |diff| dense ", worst_dense, ", closed form ", worst_pauli,
             " (limit ", kC2Tol, "), ", t, " s"));
}

void criterion3() {
  bool ok = true;
  std::string detail;
  for (double p : {0.05, 0.1, 0.3}) {
    const SelectionResult r = minimize_angles(
        [p](RotationAngles a) { return -npc_pauli_haar(a, p); }, OptimizerConfig{});
    const RotationAngles a = r.angles.canonical();
    const double dth = std::abs(a.theta - kPi / 4);
    const double dph = std::abs(a.phi);
    ok = ok && dth <= kC3AngleTol && dph <= kC3AngleTol;
    detail += fmt("p=", p, ": |dtheta|=", dth, " |phi|=", dph, "; ");
  }
  report(3, ok, "Haar-averaged Pauli N_pc maximized at theta=pi/4, phi=0", detail);
}

void criterion4() {
  const auto t0 = Clock::now();
  auto range = [](const std::vector<double>& v) {
    return *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
  };
  bool ok = true;
  std::string detail;
  for (ChannelKind kind : {ChannelKind::amplitude_damping, ChannelKind::phase_flip}) {
    const auto pts = fig2_sweep(kind, 0.1, 10000, 7);
    const auto best_te = std::min_element(pts.begin(), pts.end(), [](auto& a, auto& b) {
      return a.excess_te < b.excess_te;
    });
    const bool at_pi4 = std::abs(best_te->theta - kPi / 4) < 1e-9;
    ok = ok && at_pi4;
    detail += fmt(to_string(kind), ": min excess TE at theta=", best_te->theta);
    if (kind == ChannelKind::phase_flip) {
      const auto best_npc = std::min_element(pts.begin(), pts.end(), [](auto& a, auto& b) {
        return a.neg_npc < b.neg_npc;
      });
      const bool phi0 = std::abs(best_npc->phi) < 1e-9 && std::abs(best_te->phi) < 1e-9;
      ok = ok && phi0;
      detail += fmt(" phi=", best_te->phi, ", min -N_pc at phi=", best_npc->phi, "; ");
    } else {
      // Spreads of mean -N_pc along each grid axis, worst case over the other axis.
      std::vector<double> thetas, phis;
      for (const auto& q : pts) {
        if (std::find(thetas.begin(), thetas.end(), q.theta) == thetas.end()) thetas.push_back(q.theta);
        if (std::find(phis.begin(), phis.end(), q.phi) == phis.end()) phis.push_back(q.phi);
      }
      double phi_spread = 0.0, theta_spread = 0.0;
      for (double th : thetas) {
        std::vector<double> v;
        for (const auto& q : pts) if (q.theta == th) v.push_back(q.neg_npc);
        phi_spread = std::max(phi_spread, range(v));
      }
      for (double ph : phis) {
        std::vector<double> v;
        for (const auto& q : pts) if (q.phi == ph) v.push_back(q.neg_npc);
        theta_spread = std::max(theta_spread, range(v));
      }
      const bool flat = phi_spread <= kC4SpreadRatio * theta_spread;
      ok = ok && flat;
      detail += fmt(", -N_pc spread phi ", phi_spread, " vs theta ", theta_spread, "; ");
    }
  }
  const double t = seconds_since(t0);
  ok = ok && t <= kC4Budget;
  report(4, ok, "two-qubit (theta, phi) sweep, 10^4 states, p=0.1", detail + fmt(t, " s"));
}

// Criterion 5 pilot; its spectra feed criterion 6.
std::uint64_t g_c5_spectra = 0, g_c5_violations = 0;

void criterion5() {
  const int n = 16, chi = 64, full_nt = 500;
  const ExperimentConfig base;  // desk depth
  const int layers = base.layers;
  const int first_sat = layers - layers / 4 + 1;
  const std::vector<UnravelingStrategy> order{Geo2Unraveling{}, NumuUnraveling{}, fixed_pi4(),
                                              NaiveUnraveling{}};
  const bool full = std::getenv("QTRAJ_ACCEPT_FULL") != nullptr;

  struct Channel { ChannelKind kind; double rate; };
  const std::vector<Channel> channels{{ChannelKind::amplitude_damping, 0.3},
                                      {ChannelKind::phase_flip, 0.1}};
  double projected = 0.0;
  std::string detail;
  std::vector<std::vector<Ensemble>> runs;
  for (const auto& ch : channels) {
    runs.emplace_back();
    for (const auto& s : order) {
      const int nt = full ? full_nt : 1;
      const auto cfg = base_config(n, layers, ch.kind, ch.rate, nt, chi, 505);
      Ensemble e = run_ensemble(cfg, s, first_sat);
      const auto st = e.all.finalize();
      g_c5_spectra += e.all.samples();
      g_c5_violations += st.chebyshev_violations;
      projected += e.seconds / nt * full_nt;
      runs.back().push_back(std::move(e));
    }
  }
  if (!full && projected > kC5Budget) {
    report(5, false, "n=16 chi=64 n_T=500 saturated TE ordering geo2 <= numu <= fixed <= naive",
           fmt("not run: 1-trajectory pilot projects ", projected / 3600.0,
               " h on this machine (limit 1 h); set QTRAJ_ACCEPT_FULL=1 to run anyway"));
    return;
  }
  bool ok = full || projected <= kC5Budget;
  if (!full) {
    // The pilot fits the budget: rerun at full size.
    runs.clear();
    projected = 0.0;
    for (const auto& ch : channels) {
      runs.emplace_back();
      for (const auto& s : order) {
        const auto cfg = base_config(n, layers, ch.kind, ch.rate, full_nt, chi, 505);
        Ensemble e = run_ensemble(cfg, s, first_sat);
        g_c5_spectra += e.all.samples();
        g_c5_violations += e.all.finalize().chebyshev_violations;
        projected += e.seconds;
        runs.back().push_back(std::move(e));
      }
    }
  }
  double total = 0.0;
  for (std::size_t c = 0; c < channels.size(); ++c) {
    detail += fmt(to_string(channels[c].kind), ":");
    for (std::size_t i = 0; i < order.size(); ++i) {
      const auto st = runs[c][i].saturated.finalize();
      total += runs[c][i].seconds;
      detail += fmt(" ", strategy_name(order[i]), "=", st.entropy.mean, "+-", st.entropy.se);
      if (i > 0) {
        const auto prev = runs[c][i - 1].saturated.finalize();
        ok = ok && st.entropy.mean - prev.entropy.mean >= -(st.entropy.se + prev.entropy.se);
      }
    }
    detail += "; ";
  }
  ok = ok && total <= kC5Budget;
  report(5, ok, "n=16 chi=64 n_T=500 saturated TE ordering geo2 <= numu <= fixed <= naive",
         detail + fmt(total, " s"));
}

// Spectra with known shapes, including heavy tails that stress the bound.
std::vector<double> synthetic_spectrum(CounterRng& rng) {
  const int d = 2 + static_cast<int>(rng.uniform() * 511);
  std::vector<double> p(d);
  const int shape = static_cast<int>(rng.uniform() * 4);
  const double a = 0.01 + 3.0 * rng.uniform();
  for (int k = 0; k < d; ++k) {
    switch (shape) {
      case 0: p[k] = std::exp(-a * k); break;
      case 1: p[k] = std::pow(k + 1.0, -1.0 - a); break;
      case 2: p[k] = -std::log(rng.uniform() + 1e-300); break;
      default: p[k] = k < d / 2 ? 1.0 : 1e-3 * rng.uniform(); break;
    }
  }
  std::sort(p.begin(), p.end(), std::greater<>());
  double s = 0.0;
  for (double x : p) s += x;
  for (double& x : p) x /= s;
  return p;
}

void criterion6() {
  CounterRng rng(0xACC6);
  std::uint64_t violations = 0;
  double worst = 0.0;
  const int synthetic = 10000;
  for (int i = 0; i < synthetic; ++i) {
    const auto p = synthetic_spectrum(rng);
    const SpectrumStats s = effective_rank(p, kC6Epsilon);
    const double tail = chebyshev_tail(p, s.chi_eff);
    worst = std::max(worst, tail);
    if (tail > kC6Epsilon) ++violations;
  }
  const bool ok = violations == 0 && g_c5_violations == 0 && g_c5_spectra > 0;
  report(6, ok, "Chebyshev tail <= epsilon on every spectrum",
         fmt(g_c5_spectra, " spectra from criterion 5 runs (", g_c5_violations,
             " violations), ", synthetic, " synthetic (", violations,
             " violations, max tail ", worst, ")"));
}

// Criteria 7 and 8 share the n=20 amplitude-damping runs.
std::vector<double> g_c8_samples[2];

void criterion7() {
  const int n = 20, layers = 30, nt = 32, chi = 64;
  const int first_sat = layers - layers / 4 + 1;
  auto cfg = base_config(n, layers, ChannelKind::amplitude_damping, 0.3, nt, chi, 707);
  cfg.bond_window = 9;
  cfg.circuit_instances = 4;
  Ensemble fixed = run_ensemble(cfg, fixed_pi4(), first_sat);
  Ensemble numu = run_ensemble(cfg, NumuUnraveling{}, first_sat);
  const auto f = fixed.saturated.finalize().chi_eff;
  const auto m = numu.saturated.finalize().chi_eff;
  g_c8_samples[0] = std::move(fixed.chi_eff);
  g_c8_samples[1] = std::move(numu.chi_eff);
  const bool ok = m.mean < f.mean && m.mean + m.se < f.mean - f.se;
  report(7, ok, "n=20 AD 0.3 saturated chi_eff: numu below fixed pi/4, bands disjoint",
         fmt("numu ", m.mean, "+-", m.se, " vs fixed ", f.mean, "+-", f.se, " over layers ",
             first_sat, "-", layers, ", ", fixed.seconds + numu.seconds, " s"));
}

struct TailFit {
  double slope = 0.0;
  double r2 = 0.0;
  int points = 0;
};

// Least squares of log(count) on bin centre, from the modal bin to the last populated bin.
TailFit exponential_tail(const std::vector<double>& v, int bins) {
  const double lo = *std::min_element(v.begin(), v.end());
  const double hi = *std::max_element(v.begin(), v.end()) * (1 + 1e-12);
  std::vector<double> counts(bins, 0.0);
  for (double x : v) counts[std::min(bins - 1, static_cast<int>((x - lo) / (hi - lo) * bins))] += 1;
  const int mode = static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  std::vector<double> xs, ys;
  for (int k = mode; k < bins; ++k) {
    if (counts[k] <= 0) continue;
    xs.push_back(lo + (k + 0.5) * (hi - lo) / bins);
    ys.push_back(std::log(counts[k]));
  }
  TailFit fit;
  fit.points = static_cast<int>(xs.size());
  if (fit.points < 3) return fit;
  const double mx = mean_se(xs).mean, my = mean_se(ys).mean;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.r2 = syy > 0 ? sxy * sxy / (sxx * syy) : 0.0;
  return fit;
}

void criterion8() {
  bool ok = !g_c8_samples[0].empty() && !g_c8_samples[1].empty();
  std::string detail;
  const char* names[2] = {"fixed", "numu"};
  for (int i = 0; i < 2 && ok; ++i) {
    const TailFit fit = exponential_tail(g_c8_samples[i], 20);
    ok = ok && fit.points >= 3 && fit.slope < 0 && fit.r2 >= kC8MinR2;
    detail += fmt(names[i], ": ", g_c8_samples[i].size(), " samples, slope ", fit.slope,
                  ", R^2 ", fit.r2, " over ", fit.points, " bins; ");
  }
  report(8, ok, "chi_eff histogram tail is exponential (n=20 AD 0.3 runs)", detail);
}

void criterion9() {
  const int n = 16, layers = 24, nt = 10, chi = 64;
  const int first_sat = layers / 2 + 1;
  auto theta_hist = [&](ChannelKind kind, double rate) {
    auto cfg = base_config(n, layers, kind, rate, nt, chi, 909);
    return run_ensemble(cfg, NumuUnraveling{}, first_sat).saturated.finalize().theta_hist;
  };
  auto centre = [](const Histogram& h, int k) { return 0.5 * (h.bin_lo(k) + h.bin_hi(k)); };
  bool ok = true;
  std::string detail;
  for (double rate : {0.05, 0.1}) {
    const Histogram h = theta_hist(ChannelKind::phase_flip, rate);
    const auto& c = h.counts();
    const int mode = static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
    const double off = std::abs(centre(h, mode) - kPi / 4);
    ok = ok && off <= kC9ModeHalfWidth;
    detail += fmt("PF ", rate, ": mode ", centre(h, mode), " (|d| ", off, "); ");
  }
  const Histogram h = theta_hist(ChannelKind::amplitude_damping, 0.05);
  std::uint64_t left = 0, right = 0, dip = std::numeric_limits<std::uint64_t>::max(), top = 0;
  for (int k = 0; k < h.bins(); ++k) {
    const double x = centre(h, k);
    const std::uint64_t v = h.count(k);
    top = std::max(top, v);
    if (std::abs(x - kPi / 8) <= kPi / 16) left = std::max(left, v);
    if (std::abs(x - 3 * kPi / 8) <= kPi / 16) right = std::max(right, v);
    if (std::abs(x - kPi / 4) < kPi / 16) dip = std::min(dip, v);
  }
  const double lower_peak = static_cast<double>(std::min(left, right));
  const bool bimodal = std::max(left, right) == top && lower_peak > 0 &&
                       static_cast<double>(dip) <= (1 - kC9MinDip) * lower_peak;
  ok = ok && bimodal;
  detail += fmt("AD 0.05: peaks ", left, " near pi/8 and ", right, " near 3pi/8, dip ", dip,
                " near pi/4");
  report(9, ok, "numu theta histograms (n=16 chi=64)", detail);
}

void criterion10() {
  // Dense agreement at n=5.
  double worst = 0.0;
  {
    const int n = 5, layers = 6;
    const CircuitPlan plan = brickwork(n, layers, 1010);
    for (ChannelKind kind : {ChannelKind::amplitude_damping, ChannelKind::phase_flip}) {
      const KrausSet ks = make_channel(kind, 0.15);
      const auto exact = evolve_density(plan, ks, "00000");
      const RMatrix chan = channel_superop(ks);
      MpdoState rho = mpdo_from_bitstring("00000", 1024);
      for (int l = 0; l < layers; ++l) {
        for (const GateOp& g : plan.gates[l]) rho.apply_gate(gate_superop(g.unitary), g.site);
        for (int q = 0; q < n; ++q) rho.apply_channel(chan, q);
        worst = std::max(worst, max_abs_diff(mpdo_to_dense(rho), exact[l]));
      }
    }
  }
  // Phase flip at n=20: entanglement barrier, then a product state.
  auto mpdo_stats = [](ChannelKind kind, double rate, int layers, int instances) {
    auto cfg = base_config(20, layers, kind, rate, 1, 64, 1011);
    cfg.engine = Engine::mpdo;
    cfg.bond_window = 5;
    cfg.circuit_instances = instances;
    return run_mpdo(cfg, 64, make_plans(cfg)).stats();
  };
  const auto pf = mpdo_stats(ChannelKind::phase_flip, 0.08, 30, 1);
  std::size_t peak = 0;
  for (std::size_t l = 0; l < pf.size(); ++l)
    if (pf[l].entropy.mean > pf[peak].entropy.mean) peak = l;
  const double oe_peak = pf[peak].entropy.mean;
  const bool barrier = peak > 0 && peak + 1 < pf.size() &&
                       pf.front().entropy.mean < oe_peak && pf.back().entropy.mean < 0.01 * oe_peak;
  const double final_chi = pf.back().chi_eff.mean;

  // Amplitude damping: late-time plateau whose level depends on the rate.
  bool plateau = true;
  std::string ad_detail;
  MeanSe levels[2];
  const double rates[2] = {0.1, 0.3};
  for (int i = 0; i < 2; ++i) {
    const int layers = 40;
    const auto ad = mpdo_stats(ChannelKind::amplitude_damping, rates[i], layers, 2);
    std::vector<double> q3, q4, chi4;
    for (int l = layers / 2; l < 3 * layers / 4; ++l) q3.push_back(ad[l].entropy.mean);
    for (int l = 3 * layers / 4; l < layers; ++l) {
      q4.push_back(ad[l].entropy.mean);
      chi4.push_back(ad[l].chi_eff.mean);
    }
    const double m3 = mean_se(q3).mean, m4 = mean_se(q4).mean;
    levels[i] = mean_se(chi4);
    plateau = plateau && m4 > 0.05 && std::abs(m3 - m4) <= kC10PlateauDrift * m4;
    ad_detail += fmt("AD ", rates[i], ": OE ", m3, " -> ", m4, ", chi_eff ", levels[i].mean,
                     "+-", levels[i].se, "; ");
  }
  const bool distinct = std::abs(levels[0].mean - levels[1].mean) > levels[0].se + levels[1].se;
  const bool ok = worst <= kC10DenseTol && barrier && final_chi <= kC10FinalChiEff && plateau &&
                  distinct;
  report(10, ok, "MPDO: dense agreement, phase-flip barrier, amplitude-damping plateau",
         fmt("n=5 max |diff| ", worst, "; PF 0.08 OE peak ", oe_peak, " at layer ", peak + 1,
             ", final OE ", pf.back().entropy.mean, ", final chi_eff ", final_chi, "; ",
             ad_detail));
}

void criterion11() {
  auto cfg = base_config(16, 32, ChannelKind::amplitude_damping, 0.3, 16, 64, 1111);
  cfg.unravelings = {NaiveUnraveling{}, NumuUnraveling{}};
  cfg.circuit_instances = 4;
  cfg.bond_window = 5;
  cfg.output_dir = (std::filesystem::temp_directory_path() / "qtraj_accept_scaling").string();
  const std::vector<double> rates{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  const ScalingReport rep = scaling_report(cfg, rates);
  bool ok = true;
  std::string detail;
  for (const auto& c : rep.curves) {
    if (c.rate == rates.back()) {
      ok = ok && c.area_law;
      detail += fmt(c.strategy, " ", c.rate, (c.area_law ? " area-law" : " not area-law"), "; ");
    }
    if (c.rate == rates.front()) {
      // Before boundary effects reach the centre (L <= n) the curve must rise.
      const int n = cfg.n;
      const double early = c.chi_eff[n / 2 - 1] / (n / 2);
      const double late = c.chi_eff[n - 1] / n;
      ok = ok && late > early;
      detail += fmt(c.strategy, " ", c.rate, " chi_eff/L ", early, " -> ", late, "; ");
    }
  }
  auto crossover = [&](const std::string& name) {
    for (const auto& [s, pc] : rep.crossover)
      if (s == name) return std::isnan(pc) ? std::numeric_limits<double>::infinity() : pc;
    return std::numeric_limits<double>::quiet_NaN();
  };
  const double naive = crossover("naive"), numu = crossover("numu");
  ok = ok && std::isfinite(numu) && naive > numu;
  report(11, ok, "scaling report shapes and crossover order (n=16 chi=64, AD)",
         detail + fmt("crossover naive ", naive, " vs numu ", numu));
}

void criterion12() {
  const int n = 16, site = n / 2 - 1, reps = 20, trials = 5;
  const KrausSet ks = make_channel(ChannelKind::amplitude_damping, 0.3);
  const CircuitPlan plan = brickwork(n, 20, 1212);
  const Mat4 u = plan.gates[0][0].unitary;
  std::vector<double> gate, numu;
  for (int chi : {32, 64, 128}) {
    TrajectoryState st = product_state(std::string(n, '0'), chi);
    for (const auto& layer : plan.gates)
      for (const auto& g : layer) apply_two_qubit_gate(st, g.unitary, g.site);
    apply_two_qubit_gate(st, u, site);
    numu_select(st, ks, site);  // leaves the centre on `site`
    // Best of several trials filters scheduler noise.
    double tg = 1e30, tn = 1e30;
    for (int t = 0; t < trials; ++t) {
      auto t0 = Clock::now();
      for (int r = 0; r < reps; ++r) apply_two_qubit_gate(st, u, site);
      tg = std::min(tg, seconds_since(t0) / reps);
      t0 = Clock::now();
      for (int r = 0; r < reps; ++r) numu_select(st, ks, site);
      tn = std::min(tn, seconds_since(t0) / reps);
    }
    gate.push_back(tg);
    numu.push_back(tn);
  }
  bool ok = true;
  std::string detail;
  for (int i = 1; i < 3; ++i) {
    const double g = gate[i] / gate[i - 1], m = numu[i] / numu[i - 1];
    ok = ok && g >= kC12GateGrowth && m <= kC12NumuGrowth;
    detail += fmt("chi ", 32 << (i - 1), "->", 32 << i, ": gate x", g, ", numu_select x", m, "; ");
  }
  detail += fmt("numu_select at chi=128 ", numu[2] * 1e3, " ms, gate ", gate[2] * 1e3, " ms");
  report(12, ok, "numu_select O(chi^2) vs gate O(chi^3) growth (n=16)", detail);
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  guarded(1, "n=5 dense agreement", criterion1);
  guarded(2, "numu_cost oracles", criterion2);
  guarded(3, "Haar optimum", criterion3);
  guarded(4, "two-qubit sweep", criterion4);
  guarded(5, "strategy ordering", criterion5);
  guarded(6, "Chebyshev bound", criterion6);
  guarded(7, "numu vs fixed chi_eff", criterion7);
  guarded(8, "exponential tail", criterion8);
  guarded(9, "angle histograms", criterion9);
  guarded(10, "MPDO", criterion10);
  guarded(11, "scaling report", criterion11);
  guarded(12, "numu overhead scaling", criterion12);
  std::cout << "acceptance: " << g_pass << " passed, " << g_fail << " failed, "
            << seconds_since(t0) << " s" << std::endl;
  return 0;
}
