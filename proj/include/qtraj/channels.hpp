#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qtraj/linalg.hpp"

namespace qtraj {

enum class ChannelKind { amplitude_damping, phase_flip, bit_flip, bit_phase_flip, custom };

std::string_view to_string(ChannelKind kind);
// Accepts the long names and the short aliases ad, pf, bf, bpf.
ChannelKind parse_channel_kind(std::string_view name);

// Completeness sum_j E_j^dag E_j = 1 holds to 1e-12 entrywise for every instance.
class KrausSet {
 public:
  KrausSet(std::vector<Mat2> ops, double rate, ChannelKind label);

  std::size_t size() const { return ops_.size(); }
  const Mat2& operator[](std::size_t j) const { return ops_[j]; }
  std::span<const Mat2> ops() const { return ops_; }
  double rate() const { return rate_; }
  ChannelKind label() const { return label_; }

  // Channel action sum_j E_j rho E_j^dag on a single-qubit density matrix.
  Mat2 apply(const Mat2& rho) const;

 private:
  std::vector<Mat2> ops_;
  double rate_;
  ChannelKind label_;
};

inline constexpr double kCompletenessTol = 1e-12;

struct RotationAngles {
  double theta = 0.0;
  double phi = 0.0;

  // Representative with theta in [0, pi/2) and phi in [-pi/2, pi/2).
  // theta + pi/2 only relabels the two outcomes; theta + pi and phi + pi only flip
  // a global sign, so the canonical angles induce the same unraveling.
  RotationAngles canonical() const;
  friend bool operator==(const RotationAngles&, const RotationAngles&) = default;
};

// U = [[cos t, sin t], [-sin t, cos t]] * diag(e^{i phi}, e^{-i phi}).
Mat2 rotation_unitary(RotationAngles angles);

Mat2 pauli_x();
Mat2 pauli_y();
Mat2 pauli_z();

// Canonical Kraus pair of the named channel; rate must lie in [0, 1].
KrausSet make_channel(ChannelKind kind, double rate);
KrausSet make_channel(std::string_view name, double rate);

// F_j = sum_k u_jk E_k. Requires exactly two operators.
KrausSet rotate(const KrausSet& ks, RotationAngles angles);

// {sqrt(1-2p) 1, sqrt(2p) |0><0|, sqrt(2p) |1><1|}; rate in [0, 0.5].
KrausSet naive_phase_flip(double rate);

// Projective unraveling for Pauli channels (eigenprojectors of the flip operator),
// the canonical pair for amplitude damping.
KrausSet naive_unraveling(ChannelKind kind, double rate);

// t[a,b,c,d] = tr(E_a^dag E_b E_c^dag E_d) for a two-operator set.
class TraceTensor {
 public:
  cplx operator()(int a, int b, int c, int d) const { return t_[((a * 2 + b) * 2 + c) * 2 + d]; }
  cplx& at(int a, int b, int c, int d) { return t_[((a * 2 + b) * 2 + c) * 2 + d]; }

 private:
  std::array<cplx, 16> t_{};
};

TraceTensor trace_tensor(const KrausSet& ks);

// G = E_1 (x) 1 + E_2 (x) sigma_x on (system, ancilla), ancilla as the less significant qubit.
Mat4 ancilla_gate(const KrausSet& ks);

}  // namespace qtraj
