#pragma once

#include <iosfwd>
#include <string_view>
#include <utility>
#include <vector>

#include "qtraj/canonical_chain.hpp"
#include "qtraj/channels.hpp"

namespace qtraj {

inline constexpr double kDefaultSvdFloor = 1e-12;
inline constexpr double kZeroProbability = 1e-14;
inline constexpr double kUnitarityTol = 1e-10;
inline constexpr int kMaxDenseQubits = 14;

// One pure trajectory of n qubits. Site 0 is the most significant qubit.
class TrajectoryState {
 public:
  using Chain = CanonicalChain<cplx, 2>;

  TrajectoryState() = default;
  explicit TrajectoryState(Chain chain) : chain_(std::move(chain)) {}

  int size() const { return chain_.size(); }
  Chain& chain() { return chain_; }
  const Chain& chain() const { return chain_; }
  void canonicalize() { chain_.canonicalize(); }

 private:
  Chain chain_;
};

// bits: one character '0' or '1' per site.
TrajectoryState product_state(std::string_view bits, int chi_max,
                              double svd_floor = kDefaultSvdFloor);

// Exact encoding of a 2^n amplitude vector, truncated to chi_max.
TrajectoryState from_dense(const CVector& psi, int n, int chi_max,
                           double svd_floor = kDefaultSvdFloor);

// Applies u to qubits (site, site + 1) with site the more significant index.
// Returns the truncation weight of this step.
double apply_two_qubit_gate(TrajectoryState& state, const Mat4& u, int site);

// Candidate post-measurement center tensors for every Kraus operator at one site.
struct ChannelTensors {
  int site = 0;
  std::vector<TrajectoryState::Chain::Site> branches;  // unit norm where probability > 0
  std::vector<double> probabilities;                   // <F_j^dag F_j>, sums to 1
};

ChannelTensors channel_tensors(TrajectoryState& state, const KrausSet& ks, int site);

// Makes branch `outcome` the new center tensor. Bond spectra go stale until
// canonicalize().
void commit_outcome(TrajectoryState& state, const ChannelTensors& tensors, int outcome);

// p_alpha = lambda_alpha^2 for bond b, descending, summing to 1.
std::vector<double> schmidt_spectrum(const TrajectoryState& state, int bond);

// Single-qubit reduced density matrix rho(a, b) = <psi| |b><a| |psi> at the center site.
Mat2 local_density(TrajectoryState& state, int site);

// o_kl = <psi| E_k^dag E_l |psi> for a two-operator set.
Mat2 overlaps(TrajectoryState& state, const KrausSet& ks, int site);

CVector to_dense(const TrajectoryState& state);

// [first, first + count) bond indices, count = min(width, n - 1), centered on bond n/2 - 1.
std::pair<int, int> bond_window(int n, int width);

// Rows "bond,index,p_alpha" with 1-based index; canonicalizes stale bonds first.
void write_spectra_csv(TrajectoryState& state, std::ostream& out);

bool is_unitary(const Mat4& u, double tol = kUnitarityTol);

}  // namespace qtraj
