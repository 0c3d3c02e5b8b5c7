#pragma once

#include <string_view>
#include <vector>

#include "qtraj/canonical_chain.hpp"
#include "qtraj/channels.hpp"
#include "qtraj/diagnostics.hpp"

namespace qtraj {

inline constexpr int kMaxDenseMpdoQubits = 6;

// Real 4x4 / 16x16 superoperators in the normalized Pauli basis {1, X, Y, Z} / sqrt(2).
RMatrix gate_superop(const Mat4& u);
RMatrix channel_superop(const KrausSet& ks);

// Density matrix as a real matrix product vector of Pauli components,
// rho = scale * sum_a c_a e_{a_0} (x) ... (x) e_{a_{n-1}} with ||c|| = 1.
// Truncation is an L2 projection of the component vector; the trace is not restored
// unless renormalize_trace is set.
class MpdoState {
 public:
  using Chain = CanonicalChain<double, 4>;

  MpdoState() = default;
  MpdoState(Chain chain, double scale) : chain_(std::move(chain)), scale_(scale) {}

  int size() const { return chain_.size(); }
  const Chain& chain() const { return chain_; }
  double scale() const { return scale_; }  // Frobenius norm of rho

  // Returns the truncation weight of this step.
  double apply_gate(const RMatrix& superop, int site);
  void apply_channel(const RMatrix& superop, int site);
  void canonicalize() { chain_.canonicalize(); }

  double trace() const;
  void set_renormalize_trace(bool on) { renormalize_trace_ = on; }

 private:
  Chain chain_;
  double scale_ = 1.0;
  bool renormalize_trace_ = false;
};

MpdoState mpdo_from_bitstring(std::string_view bits, int chi_max, double svd_floor = 1e-12);

// Normalized squared singular values of the component vector across `bond`.
std::vector<double> mpdo_spectrum(const MpdoState& rho, int bond);

// -sum lambda^2 log2 lambda^2 across `bond`.
double operator_entanglement(const MpdoState& rho, int bond);

SpectrumStats mpdo_effective_rank(const MpdoState& rho, int bond, double epsilon = kDefaultEpsilon);

CMatrix mpdo_to_dense(const MpdoState& rho);

}  // namespace qtraj
