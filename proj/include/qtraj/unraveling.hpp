#pragma once

#include <optional>
#include <string>
#include <variant>

#include "qtraj/channels.hpp"
#include "qtraj/mps.hpp"
#include "qtraj/optimizer.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

// Which bond entropies enter the two-site entropy cost. Edge sites always use the
// single bond they have.
enum class EntropyBond { left, right, both };

struct NaiveUnraveling {};
struct FixedUnraveling {
  RotationAngles angles;
};
struct NumuUnraveling {
  OptimizerConfig optimizer;
};
struct Geo2Unraveling {
  OptimizerConfig optimizer;
  EntropyBond bond = EntropyBond::both;
};

using UnravelingStrategy =
    std::variant<NaiveUnraveling, FixedUnraveling, NumuUnraveling, Geo2Unraveling>;

// "naive", "fixed", "numu" or "geo2".
std::string strategy_name(const UnravelingStrategy& s);

// Negated average non-unitarity -N_pc of the rotated pair, from overlaps o and the
// trace tensor t. +inf when a branch probability falls below 1e-14.
double numu_cost(RotationAngles angles, const Mat2& o, const TraceTensor& t);

SelectionResult numu_select(TrajectoryState& state, const KrausSet& ks, int site,
                            const OptimizerConfig& cfg = {});

// Gram blocks of a center tensor, enough to evaluate post-measurement bond spectra
// for any single-site Kraus pair in O(chi^3) without touching the chain.
class Geo2Workspace {
 public:
  Geo2Workspace(const TrajectoryState::Chain::Site& center, bool has_left, bool has_right,
                EntropyBond bond);

  // Average post-measurement entanglement entropy S_pc (log2) of the rotated pair.
  double cost(const KrausSet& ks, RotationAngles angles) const;

 private:
  double branch_entropy(const Mat2& w, double p) const;
  double bond_entropy(int side, const Mat2& w, double p) const;

  bool use_left_;
  bool use_right_;
  Mat2 gram_;
  std::array<CMatrix, 4> left_;   // C_a C_b^dag, index a * 2 + b
  std::array<CMatrix, 4> right_;  // C_a^dag C_b
  // Reused across cost() calls; a workspace is never shared between threads.
  mutable std::array<CMatrix, 2> scratch_;
};

double geo2_cost(TrajectoryState& state, const KrausSet& ks, int site, RotationAngles angles,
                 EntropyBond bond = EntropyBond::both);

SelectionResult geo2_select(TrajectoryState& state, const KrausSet& ks, int site,
                            const OptimizerConfig& cfg = {},
                            EntropyBond bond = EntropyBond::both);

struct UpdateRecord {
  int layer = 0;
  int site = 0;
  std::optional<RotationAngles> angles;  // absent for the naive unraveling
  int outcome = 0;
  double probability = 1.0;
  std::optional<double> cost;  // optimizer objective at the chosen angles
  bool optimizer_warning = false;
  int evaluations = 0;
};

// Channel plus strategy with everything angle-independent precomputed.
class Unraveler {
 public:
  Unraveler(const KrausSet& channel, UnravelingStrategy strategy);

  // One stochastic channel application at `site`. Consumes exactly one uniform draw.
  UpdateRecord update(TrajectoryState& state, int site, CounterRng& rng, int layer = 0) const;

  const KrausSet& channel() const { return channel_; }
  const UnravelingStrategy& strategy() const { return strategy_; }

 private:
  KrausSet channel_;
  UnravelingStrategy strategy_;
  std::optional<KrausSet> static_set_;  // naive or fixed-rotation operators
  std::optional<TraceTensor> trace_;
};

UpdateRecord stochastic_update(TrajectoryState& state, const KrausSet& ks, int site,
                               const UnravelingStrategy& strategy, CounterRng& rng,
                               int layer = 0);

}  // namespace qtraj
