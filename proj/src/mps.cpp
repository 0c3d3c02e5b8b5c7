#include "qtraj/mps.hpp"

#include <ostream>
#include <string>

#include "qtraj/errors.hpp"
#include "qtraj/io.hpp"

namespace qtraj {

TrajectoryState product_state(std::string_view bits, int chi_max, double svd_floor) {
  if (bits.empty()) throw DomainError("empty bitstring");
  std::vector<TrajectoryState::Chain::Local> locals;
  locals.reserve(bits.size());
  for (char ch : bits) {
    if (ch == '0') {
      locals.push_back({1.0, 0.0});
    } else if (ch == '1') {
      locals.push_back({0.0, 1.0});
    } else {
      throw DomainError(std::string("invalid bit '") + ch + "'");
    }
  }
  return TrajectoryState(TrajectoryState::Chain::product(locals, chi_max, svd_floor));
}

TrajectoryState from_dense(const CVector& psi, int n, int chi_max, double svd_floor) {
  if (n > kMaxDenseQubits) throw CapacityError("dense encoding limited to 14 qubits");
  return TrajectoryState(TrajectoryState::Chain::from_vector(psi, n, chi_max, svd_floor));
}

bool is_unitary(const Mat4& u, double tol) {
  return max_abs_diff(u.adjoint() * u, Mat4::Identity()) <= tol;
}

double apply_two_qubit_gate(TrajectoryState& state, const Mat4& u, int site) {
  if (!is_unitary(u)) throw ValidationError("two-qubit gate is not unitary");
  if (site < 0 || site + 1 >= state.size()) throw DomainError("gate site out of range");
  const CMatrix op = u;
  return state.chain().apply_pair(site, op).discarded;
}

ChannelTensors channel_tensors(TrajectoryState& state, const KrausSet& ks, int site) {
  if (site < 0 || site >= state.size()) throw DomainError("channel site out of range");
  auto& chain = state.chain();
  chain.move_center(site);
  const auto& c = chain.center_tensor();
  ChannelTensors out;
  out.site = site;
  out.branches.resize(ks.size());
  out.probabilities.resize(ks.size());
  for (std::size_t j = 0; j < ks.size(); ++j) {
    auto& a = out.branches[j];
    for (int i = 0; i < 2; ++i) a[i] = ks[j](i, 0) * c[0] + ks[j](i, 1) * c[1];
    const double p = a[0].squaredNorm() + a[1].squaredNorm();
    out.probabilities[j] = p;
    if (p > 0.0) {
      const double inv = 1.0 / std::sqrt(p);
      a[0] *= inv;
      a[1] *= inv;
    }
  }
  return out;
}

void commit_outcome(TrajectoryState& state, const ChannelTensors& tensors, int outcome) {
  if (outcome < 0 || outcome >= static_cast<int>(tensors.branches.size())) {
    throw DomainError("outcome index out of range");
  }
  if (state.chain().center() != tensors.site) {
    throw ValidationError("channel tensors were computed for a different center");
  }
  const double p = tensors.probabilities[outcome];
  if (!(p >= kZeroProbability)) {
    throw ZeroProbabilityError("committed outcome " + std::to_string(outcome) +
                               " has probability " + std::to_string(p));
  }
  state.chain().replace_center(tensors.branches[outcome]);
}

std::vector<double> schmidt_spectrum(const TrajectoryState& state, int bond) {
  const RVector& l = state.chain().lambda(bond);
  std::vector<double> p(l.size());
  for (Eigen::Index a = 0; a < l.size(); ++a) p[a] = l[a] * l[a];
  return p;
}

Mat2 local_density(TrajectoryState& state, int site) {
  if (site < 0 || site >= state.size()) throw DomainError("site out of range");
  state.chain().move_center(site);
  const Eigen::Matrix2cd g = state.chain().center_gram();
  return g.transpose();
}

Mat2 overlaps(TrajectoryState& state, const KrausSet& ks, int site) {
  if (ks.size() != 2) throw ArityError("overlaps need exactly 2 Kraus operators");
  const Mat2 rho = local_density(state, site);
  Mat2 o;
  for (int k = 0; k < 2; ++k)
    for (int l = 0; l < 2; ++l) o(k, l) = (ks[k].adjoint() * ks[l] * rho).trace();
  return o;
}

CVector to_dense(const TrajectoryState& state) {
  if (state.size() > kMaxDenseQubits) {
    throw CapacityError("dense export limited to 14 qubits, state has " +
                        std::to_string(state.size()));
  }
  return state.chain().to_vector();
}

std::pair<int, int> bond_window(int n, int width) {
  const int bonds = std::max(n - 1, 0);
  const int count = std::min(width, bonds);
  const int middle = n / 2 - 1;
  int first = middle - (count - 1) / 2;
  first = std::clamp(first, 0, bonds - count);
  return {first, count};
}

void write_spectra_csv(TrajectoryState& state, std::ostream& out) {
  state.canonicalize();
  out << "bond,index,p_alpha\n";
  for (int b = 0; b + 1 < state.size(); ++b) {
    const auto p = schmidt_spectrum(state, b);
    for (std::size_t a = 0; a < p.size(); ++a) out << b << ',' << a + 1 << ',' << format_double(p[a]) << '\n';
  }
}

}  // namespace qtraj
