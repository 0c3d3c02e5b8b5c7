#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string_view>
#include <vector>

#include "qtraj/channels.hpp"
#include "qtraj/circuits.hpp"
#include "qtraj/rng.hpp"

namespace qtraj {

inline constexpr int kMaxOracleStateQubits = 12;
inline constexpr int kMaxOracleDensityQubits = 6;

// Brute-force state vector, site 0 most significant.
class DenseState {
 public:
  DenseState(int n, CVector amps);
  static DenseState product(std::string_view bits);
  static DenseState random(int n, CounterRng& rng);  // Haar-random pure state

  int size() const { return n_; }
  const CVector& amplitudes() const { return amps_; }
  double norm2() const { return amps_.squaredNorm(); }
  void normalize() { amps_.normalize(); }

  void apply_one(const Mat2& op, int site);
  void apply_two(const Mat4& op, int site);  // (site, site + 1), site most significant
  Mat2 reduced_qubit(int site) const;

 private:
  int n_;
  CVector amps_;
};

// Expands a one- or two-qubit operator to the full 2^n space.
CMatrix embed_one(const Mat2& op, int site, int n);
CMatrix embed_two(const Mat4& op, int site, int n);

class DenseDensity {
 public:
  DenseDensity(int n, CMatrix rho);
  static DenseDensity product(std::string_view bits);

  int size() const { return n_; }
  const CMatrix& matrix() const { return rho_; }
  void apply_unitary(const Mat4& u, int site);
  void apply_channel(const KrausSet& ks, int site);

 private:
  int n_;
  CMatrix rho_;
};

double trace_distance(const CMatrix& a, const CMatrix& b);

// Exact density matrix after each layer (gate layer followed by the channel on every
// qubit). Element l is the state after layer l + 1.
std::vector<CMatrix> evolve_density(const CircuitPlan& plan, const KrausSet& ks,
                                    std::string_view bits);

// Average non-unitarity sum_j p_j tr[(Q_j^dag Q_j - 1)^dag (Q_j^dag Q_j - 1)] with
// Q_j = F_j / sqrt(p_j) on the single-qubit factor (tr 1 = 2), p_j from the dense state.
double npc_dense(const DenseState& psi, const KrausSet& f, int site);

// Closed-form N_pc for a rotated Pauli channel; s = <flip-axis Pauli> of the qubit.
double npc_pauli_analytic(RotationAngles a, double p, double s);
// Haar average of the above (s = 0). Maximal at theta = pi/4, phi = 0.
double npc_pauli_haar(RotationAngles a, double p);

// Two-qubit pure state (a, b, c, d) on |00>, |01>, |10>, |11>; amplitude damping acts on
// the second qubit (site 1).
using TwoQubitAmps = std::array<cplx, 4>;

struct EigenPair {
  double plus = 0.5;
  double minus = 0.5;
};

// Closed-form reduced-state eigenvalues of branch j (0 or 1) after the rotated damping.
EigenPair ad_reduced_eigenvalues(const TwoQubitAmps& s, RotationAngles a, double p, int branch);
// Closed-form branch probability <F_j^dag F_j>.
double ad_branch_probability(const TwoQubitAmps& s, RotationAngles a, double p, int branch);
// Closed-form branch concurrence sqrt(1-p) |alpha_j|^2 C_0 / <F_j^dag F_j>.
double ad_branch_concurrence(const TwoQubitAmps& s, RotationAngles a, double p, int branch);

// |cos(2 theta) p y - sin(2 theta) sqrt(p) Re{z e^{-2 i phi}}|; zero where both
// branches share the same concurrence.
double optimal_theta_condition(const TwoQubitAmps& s, RotationAngles a, double p);

double concurrence2q(const CVector& psi);
double concurrence2q(const CMatrix& rho);  // Wootters
double eof2q(double concurrence);

struct Fig2Point {
  double theta = 0.0;
  double phi = 0.0;
  double excess_te = 0.0;  // mean S_pc - E_f
  double excess_te_se = 0.0;
  double neg_npc = 0.0;    // mean -N_pc
  double neg_npc_se = 0.0;
};

// Haar-random two-qubit states, channel on the second qubit, grid theta, phi in
// {0, pi/20, ..., pi/4}. Row order: theta major, phi minor.
std::vector<Fig2Point> fig2_sweep(ChannelKind channel, double rate, int samples,
                                  std::uint64_t seed);

void write_fig2_csv(const std::vector<Fig2Point>& pts, std::ostream& out);

}  // namespace qtraj
