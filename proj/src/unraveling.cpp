#include "qtraj/unraveling.hpp"

#include <cmath>
#include <limits>

#include "qtraj/errors.hpp"

namespace qtraj {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double entropy_of(const RVector& eig, double total) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < eig.size(); ++k) {
    const double x = eig[k] / total;
    if (x > 0.0) s -= x * std::log2(x);
  }
  return s;
}

void require_pair(const KrausSet& ks) {
  if (ks.size() != 2) {
    throw ArityError("adaptive unraveling needs exactly 2 Kraus operators, got " +
                     std::to_string(ks.size()));
  }
}

int draw_outcome(const std::vector<double>& probs, double r) {
  double total = 0.0;
  for (double p : probs) total += p;
  double acc = 0.0;
  int last_valid = -1;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (probs[j] < kZeroProbability) continue;
    last_valid = static_cast<int>(j);
    acc += probs[j] / total;
    if (r < acc) return last_valid;
  }
  if (last_valid < 0) throw ZeroProbabilityError("every outcome has zero probability");
  return last_valid;
}

}  // namespace

std::string strategy_name(const UnravelingStrategy& s) {
  return std::visit(overloaded{[](const NaiveUnraveling&) { return std::string("naive"); },
                               [](const FixedUnraveling&) { return std::string("fixed"); },
                               [](const NumuUnraveling&) { return std::string("numu"); },
                               [](const Geo2Unraveling&) { return std::string("geo2"); }},
                    s);
}

double numu_cost(RotationAngles angles, const Mat2& o, const TraceTensor& t) {
  const Mat2 u = rotation_unitary(angles);
  double npc = -2.0;
  for (int j = 0; j < 2; ++j) {
    cplx p = 0.0;
    for (int k = 0; k < 2; ++k)
      for (int l = 0; l < 2; ++l) p += std::conj(u(j, k)) * u(j, l) * o(k, l);
    if (!(p.real() >= kZeroProbability)) return kInf;
    cplx tr4 = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const cplx ab = std::conj(u(j, a)) * u(j, b);
        for (int c = 0; c < 2; ++c)
          for (int d = 0; d < 2; ++d) tr4 += ab * std::conj(u(j, c)) * u(j, d) * t(a, b, c, d);
      }
    npc += tr4.real() / p.real();
  }
  return -npc;
}

SelectionResult numu_select(TrajectoryState& state, const KrausSet& ks, int site,
                            const OptimizerConfig& cfg) {
  require_pair(ks);
  const Mat2 o = overlaps(state, ks, site);
  const TraceTensor t = trace_tensor(ks);
  return minimize_angles([&](RotationAngles a) { return numu_cost(a, o, t); }, cfg);
}

Geo2Workspace::Geo2Workspace(const TrajectoryState::Chain::Site& c, bool has_left,
                             bool has_right, EntropyBond bond)
    : use_left_(has_left && bond != EntropyBond::right),
      use_right_(has_right && bond != EntropyBond::left) {
  // An edge site falls back to the bond it has.
  if (!use_left_ && !use_right_) {
    use_left_ = has_left;
    use_right_ = has_right;
  }
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      gram_(a, b) = (c[a].conjugate().cwiseProduct(c[b])).sum();
      if (use_left_) left_[a * 2 + b] = c[a] * c[b].adjoint();
      if (use_right_) right_[a * 2 + b] = c[a].adjoint() * c[b];
    }
  if (use_left_) scratch_[0].resize(c[0].rows(), c[0].rows());
  if (use_right_) scratch_[1].resize(c[0].cols(), c[0].cols());
}

double Geo2Workspace::bond_entropy(int side, const Mat2& w, double p) const {
  // rho = sum_ab w_ab blocks[a * 2 + b], with w already arranged for this bond.
  const std::array<CMatrix, 4>& blocks = side == 0 ? left_ : right_;
  CMatrix& rho = scratch_[side];
  rho.noalias() = w(0, 0) * blocks[0];
  rho.noalias() += w(0, 1) * blocks[1];
  rho.noalias() += w(1, 0) * blocks[2];
  rho.noalias() += w(1, 1) * blocks[3];
  return entropy_of(hermitian_eigenvalues(rho), p);
}

double Geo2Workspace::branch_entropy(const Mat2& w, double p) const {
  double s = 0.0;
  int terms = 0;
  if (use_left_) {
    s += bond_entropy(0, w.transpose(), p);
    ++terms;
  }
  if (use_right_) {
    s += bond_entropy(1, w, p);
    ++terms;
  }
  return terms > 0 ? s / terms : 0.0;
}

double Geo2Workspace::cost(const KrausSet& ks, RotationAngles angles) const {
  require_pair(ks);
  const Mat2 u = rotation_unitary(angles);
  double total = 0.0;
  for (int j = 0; j < 2; ++j) {
    const Mat2 f = u(j, 0) * ks[0] + u(j, 1) * ks[1];
    const Mat2 w = f.adjoint() * f;
    const double p = (w.cwiseProduct(gram_)).sum().real();
    if (p < kZeroProbability) continue;
    total += p * branch_entropy(w, p);
  }
  return total;
}

double geo2_cost(TrajectoryState& state, const KrausSet& ks, int site, RotationAngles angles,
                 EntropyBond bond) {
  if (site < 0 || site >= state.size()) throw DomainError("site out of range");
  state.chain().move_center(site);
  const Geo2Workspace ws(state.chain().center_tensor(), site > 0, site + 1 < state.size(), bond);
  return ws.cost(ks, angles);
}

SelectionResult geo2_select(TrajectoryState& state, const KrausSet& ks, int site,
                            const OptimizerConfig& cfg, EntropyBond bond) {
  require_pair(ks);
  if (site < 0 || site >= state.size()) throw DomainError("site out of range");
  state.chain().move_center(site);
  const Geo2Workspace ws(state.chain().center_tensor(), site > 0, site + 1 < state.size(), bond);
  return minimize_angles([&](RotationAngles a) { return ws.cost(ks, a); }, cfg);
}

Unraveler::Unraveler(const KrausSet& channel, UnravelingStrategy strategy)
    : channel_(channel), strategy_(std::move(strategy)) {
  std::visit(overloaded{[&](const NaiveUnraveling&) {
                          static_set_ = naive_unraveling(channel_.label(), channel_.rate());
                        },
                        [&](const FixedUnraveling& f) { static_set_ = rotate(channel_, f.angles); },
                        [&](const NumuUnraveling& s) {
                          require_pair(channel_);
                          s.optimizer.validate();
                          trace_ = trace_tensor(channel_);
                        },
                        [&](const Geo2Unraveling& s) {
                          require_pair(channel_);
                          s.optimizer.validate();
                        }},
             strategy_);
}

UpdateRecord Unraveler::update(TrajectoryState& state, int site, CounterRng& rng,
                               int layer) const {
  UpdateRecord rec;
  rec.layer = layer;
  rec.site = site;
  if (site < 0 || site >= state.size()) throw DomainError("site out of range");
  state.chain().move_center(site);

  std::optional<KrausSet> chosen;
  auto take = [&](const SelectionResult& sel) {
    rec.angles = sel.angles;
    rec.cost = sel.cost;
    rec.optimizer_warning = !sel.converged;
    rec.evaluations = sel.evaluations;
    chosen = rotate(channel_, sel.angles);
  };
  std::visit(overloaded{[&](const NaiveUnraveling&) {},
                        [&](const FixedUnraveling& f) { rec.angles = f.angles; },
                        [&](const NumuUnraveling& s) {
                          const Mat2 o = overlaps(state, channel_, site);
                          take(minimize_angles(
                              [&](RotationAngles a) { return numu_cost(a, o, *trace_); },
                              s.optimizer));
                        },
                        [&](const Geo2Unraveling& s) {
                          const Geo2Workspace ws(state.chain().center_tensor(), site > 0,
                                                 site + 1 < state.size(), s.bond);
                          take(minimize_angles(
                              [&](RotationAngles a) { return ws.cost(channel_, a); },
                              s.optimizer));
                        }},
             strategy_);

  const KrausSet& ops = chosen ? *chosen : *static_set_;
  const ChannelTensors ct = channel_tensors(state, ops, site);
  rec.outcome = draw_outcome(ct.probabilities, rng.uniform());
  rec.probability = ct.probabilities[rec.outcome];
  commit_outcome(state, ct, rec.outcome);
  return rec;
}

UpdateRecord stochastic_update(TrajectoryState& state, const KrausSet& ks, int site,
                               const UnravelingStrategy& strategy, CounterRng& rng, int layer) {
  return Unraveler(ks, strategy).update(state, site, rng, layer);
}

}  // namespace qtraj
