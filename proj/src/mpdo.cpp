#include "qtraj/mpdo.hpp"

#include <cmath>
#include <string>

#include "qtraj/errors.hpp"
#include "qtraj/mps.hpp"

namespace qtraj {
namespace {

std::array<Mat2, 4> pauli_basis() {
  const double r = 1.0 / std::sqrt(2.0);
  return {r * Mat2::Identity(), r * pauli_x(), r * pauli_y(), r * pauli_z()};
}

Mat4 kron(const Mat2& a, const Mat2& b) {
  Mat4 m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return m;
}

}  // namespace

RMatrix gate_superop(const Mat4& u) {
  if (!is_unitary(u)) throw ValidationError("gate superoperator needs a unitary");
  const auto e = pauli_basis();
  std::array<Mat4, 16> pairs;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) pairs[a * 4 + b] = kron(e[a], e[b]);
  RMatrix s(16, 16);
  for (int in = 0; in < 16; ++in) {
    const Mat4 img = u * pairs[in] * u.adjoint();
    for (int out = 0; out < 16; ++out) s(out, in) = (pairs[out] * img).trace().real();
  }
  return s;
}

RMatrix channel_superop(const KrausSet& ks) {
  const auto e = pauli_basis();
  RMatrix s(4, 4);
  for (int b = 0; b < 4; ++b) {
    const Mat2 img = ks.apply(e[b]);
    for (int a = 0; a < 4; ++a) s(a, b) = (e[a] * img).trace().real();
  }
  return s;
}

double MpdoState::apply_gate(const RMatrix& superop, int site) {
  if (superop.rows() != 16 || superop.cols() != 16) throw ValidationError("gate superop must be 16x16");
  const double before = renormalize_trace_ ? trace() : 0.0;
  const auto res = chain_.apply_pair(site, superop);
  scale_ *= std::sqrt(res.norm2 * (1.0 - res.discarded));
  if (renormalize_trace_) {
    const double after = trace();
    if (after != 0.0) scale_ *= before / after;
  }
  return res.discarded;
}

void MpdoState::apply_channel(const RMatrix& superop, int site) {
  if (superop.rows() != 4 || superop.cols() != 4) throw ValidationError("channel superop must be 4x4");
  scale_ *= std::sqrt(chain_.apply_local(site, superop));
}

double MpdoState::trace() const {
  const std::vector<Chain::Local> w(size(), Chain::Local{std::sqrt(2.0), 0.0, 0.0, 0.0});
  return scale_ * chain_.contract(w);
}

MpdoState mpdo_from_bitstring(std::string_view bits, int chi_max, double svd_floor) {
  if (bits.empty()) throw DomainError("empty bitstring");
  const double r = 1.0 / std::sqrt(2.0);
  std::vector<MpdoState::Chain::Local> locals;
  for (char ch : bits) {
    if (ch == '0') {
      locals.push_back({r, 0.0, 0.0, r});
    } else if (ch == '1') {
      locals.push_back({r, 0.0, 0.0, -r});
    } else {
      throw DomainError(std::string("invalid bit '") + ch + "'");
    }
  }
  // Each pure local factor has unit Frobenius norm, so the product does too.
  return MpdoState(MpdoState::Chain::product(locals, chi_max, svd_floor), 1.0);
}

std::vector<double> mpdo_spectrum(const MpdoState& rho, int bond) {
  const RVector& l = rho.chain().lambda(bond);
  std::vector<double> p(l.size());
  for (Eigen::Index a = 0; a < l.size(); ++a) p[a] = l[a] * l[a];
  return p;
}

double operator_entanglement(const MpdoState& rho, int bond) {
  return von_neumann(mpdo_spectrum(rho, bond));
}

SpectrumStats mpdo_effective_rank(const MpdoState& rho, int bond, double epsilon) {
  return effective_rank(mpdo_spectrum(rho, bond), epsilon);
}

CMatrix mpdo_to_dense(const MpdoState& rho) {
  const int n = rho.size();
  if (n > kMaxDenseMpdoQubits) throw CapacityError("dense MPDO export limited to 6 qubits");
  const RVector c = rho.chain().to_vector();
  const auto e = pauli_basis();
  const int dim = 1 << n;
  CMatrix out = CMatrix::Zero(dim, dim);
  for (Eigen::Index idx = 0; idx < c.size(); ++idx) {
    if (c[idx] == 0.0) continue;
    CMatrix term = CMatrix::Ones(1, 1);
    Eigen::Index rest = idx;
    Eigen::Index place = c.size() / 4;
    for (int k = 0; k < n; ++k) {
      const int a = static_cast<int>(rest / place);
      rest %= place;
      place /= 4;
      CMatrix next(term.rows() * 2, term.cols() * 2);
      for (Eigen::Index i = 0; i < term.rows(); ++i)
        for (Eigen::Index j = 0; j < term.cols(); ++j)
          next.block(2 * i, 2 * j, 2, 2) = term(i, j) * CMatrix(e[a]);
      term = std::move(next);
    }
    out += (rho.scale() * c[idx]) * term;
  }
  return out;
}

}  // namespace qtraj
