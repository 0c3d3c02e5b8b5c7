#include <gtest/gtest.h>

#include <random>

#include "qtraj/errors.hpp"
#include "qtraj/oracle.hpp"
#include "qtraj/unraveling.hpp"
#include "support.hpp"

using namespace qtraj;

namespace {

const double kPiT = std::acos(-1.0);

// Branch-averaged bond entropy computed from dense vectors.
double dense_spc(const support::Vec& psi, int n, const KrausSet& f, int site, EntropyBond bond) {
  double total = 0.0;
  for (int j = 0; j < f.size(); ++j) {
    const support::Vec br = support::on_site(support::Mat(f[j]), site, n) * psi;
    const double p = br.squaredNorm();
    if (p < 1e-14) continue;
    const support::Vec nb = br / std::sqrt(p);
    double s = 0.0;
    int terms = 0;
    const bool left = site > 0 && bond != EntropyBond::right;
    const bool right = site + 1 < n && bond != EntropyBond::left;
    // Edge sites fall back to the bond they have.
    const bool use_left = left || (site + 1 == n);
    const bool use_right = right || (site == 0);
    if (use_left) s += support::entropy_bits(support::schmidt_probs(nb, n, site)), ++terms;
    if (use_right) s += support::entropy_bits(support::schmidt_probs(nb, n, site + 1)), ++terms;
    total += p * s / terms;
  }
  return total;
}

}  // namespace

TEST(unraveling, numu_cost_matches_dense_definition) {
  CounterRng rng(31);
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> ang(-1.5, 1.5);
  for (const char* ch : {"ad", "pf"}) {
    for (int t = 0; t < 40; ++t) {
      const int n = 2 + t % 5;
      const DenseState psi = DenseState::random(n, rng);
      TrajectoryState st = from_dense(psi.amplitudes(), n, 64);
      const int site = t % n;
      const KrausSet ks = make_channel(ch, 0.15);
      const RotationAngles a{ang(gen), ang(gen)};
      const double cost = numu_cost(a, overlaps(st, ks, site), trace_tensor(ks));
      EXPECT_NEAR(cost, -npc_dense(psi, rotate(ks, a), site), 1e-10) << ch << " t=" << t;
    }
  }
}

TEST(unraveling, numu_cost_is_infinite_on_vanishing_branch) {
  TrajectoryState st = product_state("00", 8);
  const KrausSet ks = make_channel("ad", 0.3);
  EXPECT_TRUE(std::isinf(numu_cost({0.0, 0.0}, overlaps(st, ks, 0), trace_tensor(ks))));
  const SelectionResult r = numu_select(st, ks, 0);
  EXPECT_TRUE(std::isfinite(r.cost));
}

TEST(unraveling, haar_averaged_pauli_optimum) {
  OptimizerConfig cfg;
  const SelectionResult r =
      minimize_angles([](RotationAngles a) { return -npc_pauli_haar(a, 0.1); }, cfg);
  EXPECT_NEAR(r.angles.theta, kPiT / 4, 1e-4);
  EXPECT_NEAR(r.angles.phi, 0.0, 1e-4);
  EXPECT_NEAR(-r.cost, 0.72, 1e-8);
}

TEST(unraveling, geo2_cost_matches_dense_entropies) {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> ang(-1.5, 1.5);
  for (EntropyBond bond : {EntropyBond::left, EntropyBond::right, EntropyBond::both}) {
    for (int t = 0; t < 30; ++t) {
      const int n = 2 + t % 5;
      const support::Vec psi = support::random_state(n, gen);
      TrajectoryState st = from_dense(psi, n, 64);
      const int site = t % n;
      const KrausSet ks = make_channel(t % 2 ? "ad" : "bf", 0.2);
      const RotationAngles a{ang(gen), ang(gen)};
      EXPECT_NEAR(geo2_cost(st, ks, site, a, bond), dense_spc(psi, n, rotate(ks, a), site, bond),
                  1e-9);
    }
  }
}

TEST(unraveling, geo2_on_product_state_keeps_first_seed) {
  TrajectoryState st = product_state("0110", 8);
  const SelectionResult r = geo2_select(st, make_channel("ad", 0.2), 1);
  EXPECT_EQ(r.angles, (RotationAngles{0.0, 0.0}));
  EXPECT_NEAR(r.cost, 0.0, 1e-14);
}

TEST(unraveling, geo2_never_worse_than_quarter_rotation) {
  std::mt19937_64 gen(43);
  for (int t = 0; t < 20; ++t) {
    const support::Vec psi = support::random_state(4, gen);
    TrajectoryState st = from_dense(psi, 4, 16);
    const KrausSet ks = make_channel("ad", 0.1);
    const int site = t % 4;
    const double fixed = geo2_cost(st, ks, site, {kPiT / 4, 0.0});
    EXPECT_LE(geo2_select(st, ks, site).cost, fixed + 1e-12);
  }
}

TEST(unraveling, geo2_theta_minimum_sits_on_condition_root) {
  std::mt19937_64 gen(47);
  const double p = 0.3;
  for (int t = 0; t < 10; ++t) {
    const support::Vec v = support::random_state(2, gen);
    TrajectoryState st = from_dense(v, 2, 4);
    const double phi = 0.3 * (t % 4) - 0.45;
    const KrausSet ks = make_channel("ad", p);
    // Fine scan over theta with phi pinned, then compare to the analytic root.
    double best = 1e300, best_theta = 0.0;
    for (int k = 0; k < 20000; ++k) {
      const double th = kPiT / 2 * k / 20000.0;
      const double c = geo2_cost(st, ks, 1, {th, phi});
      if (c < best) best = c, best_theta = th;
    }
    const TwoQubitAmps s{v[0], v[1], v[2], v[3]};
    const double y = std::norm(s[1]) + std::norm(s[3]);
    const cplx z = std::conj(s[0]) * s[1] + std::conj(s[2]) * s[3];
    double root = 0.5 * std::atan2(p * y, std::sqrt(p) * (z * std::polar(1.0, -2.0 * phi)).real());
    if (root < 0) root += kPiT / 2;
    double gap = std::abs(best_theta - root);
    gap = std::min(gap, kPiT / 2 - gap);
    EXPECT_LE(gap, 1e-2) << "t=" << t;
  }
}

TEST(unraveling, update_consumes_one_uniform) {
  TrajectoryState st = product_state("0101", 8);
  CounterRng rng(5);
  CounterRng ref(5);
  const Unraveler u(make_channel("ad", 0.2), NumuUnraveling{});
  const UpdateRecord rec = u.update(st, 2, rng, 3);
  ref();
  EXPECT_EQ(rng(), ref());
  EXPECT_EQ(rec.layer, 3);
  EXPECT_EQ(rec.site, 2);
  ASSERT_TRUE(rec.angles.has_value());
  EXPECT_GT(rec.probability, 0.0);
}

TEST(unraveling, two_branch_strategies_reject_three_operators) {
  TrajectoryState st = product_state("01", 8);
  const KrausSet three = naive_unraveling(ChannelKind::phase_flip, 0.1);
  EXPECT_THROW(numu_select(st, three, 0), ArityError);
  EXPECT_THROW(Unraveler(three, Geo2Unraveling{}), ArityError);
}

// Averaging trajectories reproduces the exact channel evolution for every strategy.
TEST(unraveling, trajectory_average_matches_density_evolution) {
  const int n = 3, layers = 4, samples = 1500;
  const CircuitPlan plan = brickwork(n, layers, 11);
  for (const char* ch : {"ad", "pf"}) {
    const KrausSet ks = make_channel(ch, 0.2);
    const auto exact = evolve_density(plan, ks, "000");
    std::vector<UnravelingStrategy> strategies{NaiveUnraveling{}, FixedUnraveling{{kPiT / 4, 0.0}},
                                               NumuUnraveling{}, Geo2Unraveling{}};
    for (const auto& strat : strategies) {
      const Unraveler u(ks, strat);
      std::vector<CMatrix> mean(layers, CMatrix::Zero(8, 8));
      for (int k = 0; k < samples; ++k) {
        CounterRng rng = CounterRng::stream(3, 0x51, k);
        TrajectoryState st = product_state("000", 8);
        for (int l = 0; l < layers; ++l) {
          for (const GateOp& g : plan.gates[l]) apply_two_qubit_gate(st, g.unitary, g.site);
          for (int q = 0; q < n; ++q) u.update(st, q, rng, l + 1);
          const CVector v = to_dense(st);
          mean[l] += v * v.adjoint() / double(samples);
        }
      }
      for (int l = 0; l < layers; ++l) {
        EXPECT_LE(trace_distance(mean[l], exact[l]), 0.05)
            << ch << " " << strategy_name(strat) << " layer " << l + 1;
      }
    }
  }
}
