#include "qtraj/oracle.hpp"

#include <cmath>
#include <ostream>
#include <string>

#include "qtraj/errors.hpp"
#include "qtraj/io.hpp"
#include "qtraj/mps.hpp"

namespace qtraj {
namespace {

constexpr double kSingular = 1e-14;

double binary_entropy(double x) {
  double h = 0.0;
  if (x > 0.0) h -= x * std::log2(x);
  if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
  return h;
}

void check_site(int site, int n) {
  if (site < 0 || site >= n) throw DomainError("site out of range");
}

struct AdTerms {
  double y, c0;
  cplx z;
};

AdTerms ad_terms(const TwoQubitAmps& s) {
  const auto& [a, b, c, d] = s;
  return {std::norm(b) + std::norm(d), 2.0 * std::abs(a * d - b * c),
          std::conj(a) * b + std::conj(c) * d};
}

double alpha4(RotationAngles a, int branch) {
  const double t = branch == 0 ? std::cos(a.theta) : std::sin(a.theta);
  return t * t * t * t;
}

// Wootters' R eigenvalues from rho and its spin flip.
double wootters(const Eigen::Matrix4cd& rho) {
  Eigen::Matrix4cd yy = Eigen::Matrix4cd::Zero();
  yy(0, 3) = -1.0;
  yy(1, 2) = 1.0;
  yy(2, 1) = 1.0;
  yy(3, 0) = -1.0;
  const Eigen::Matrix4cd flipped = yy * rho.conjugate() * yy;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(rho);
  const Eigen::Vector4d w = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix4cd sq = es.eigenvectors() * w.asDiagonal() * es.eigenvectors().adjoint();
  Eigen::Matrix4cd m = sq * flipped * sq;
  m = 0.5 * (m + m.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es2(m, Eigen::EigenvaluesOnly);
  Eigen::Vector4d r = es2.eigenvalues().cwiseMax(0.0).cwiseSqrt();  // ascending
  return std::max(0.0, r[3] - r[2] - r[1] - r[0]);
}

}  // namespace

DenseState::DenseState(int n, CVector amps) : n_(n), amps_(std::move(amps)) {
  if (n < 1 || n > kMaxOracleStateQubits) throw CapacityError("dense state limited to 12 qubits");
  if (amps_.size() != (Eigen::Index{1} << n)) throw ValidationError("amplitude count must be 2^n");
}

DenseState DenseState::product(std::string_view bits) {
  const int n = static_cast<int>(bits.size());
  if (n < 1 || n > kMaxOracleStateQubits) throw CapacityError("dense state limited to 12 qubits");
  Eigen::Index idx = 0;
  for (char ch : bits) {
    if (ch != '0' && ch != '1') throw DomainError("invalid bit");
    idx = idx * 2 + (ch - '0');
  }
  CVector v = CVector::Zero(Eigen::Index{1} << n);
  v[idx] = 1.0;
  return DenseState(n, std::move(v));
}

DenseState DenseState::random(int n, CounterRng& rng) {
  if (n < 1 || n > kMaxOracleStateQubits) throw CapacityError("dense state limited to 12 qubits");
  CVector v(Eigen::Index{1} << n);
  for (auto& x : v) {
    const double re = rng.normal();
    const double im = rng.normal();
    x = cplx(re, im);
  }
  v.normalize();
  return DenseState(n, std::move(v));
}

void DenseState::apply_one(const Mat2& op, int site) {
  check_site(site, n_);
  const Eigen::Index stride = Eigen::Index{1} << (n_ - 1 - site);
  for (Eigen::Index i = 0; i < amps_.size(); ++i) {
    if (i & stride) continue;
    const cplx a0 = amps_[i];
    const cplx a1 = amps_[i | stride];
    amps_[i] = op(0, 0) * a0 + op(0, 1) * a1;
    amps_[i | stride] = op(1, 0) * a0 + op(1, 1) * a1;
  }
}

void DenseState::apply_two(const Mat4& op, int site) {
  check_site(site, n_ - 1);
  const Eigen::Index hi = Eigen::Index{1} << (n_ - 1 - site);
  const Eigen::Index lo = hi >> 1;
  for (Eigen::Index i = 0; i < amps_.size(); ++i) {
    if ((i & hi) || (i & lo)) continue;
    const Eigen::Index idx[4] = {i, i | lo, i | hi, i | hi | lo};
    cplx in[4], out[4];
    for (int k = 0; k < 4; ++k) in[k] = amps_[idx[k]];
    for (int r = 0; r < 4; ++r) {
      out[r] = 0.0;
      for (int c = 0; c < 4; ++c) out[r] += op(r, c) * in[c];
    }
    for (int k = 0; k < 4; ++k) amps_[idx[k]] = out[k];
  }
}

Mat2 DenseState::reduced_qubit(int site) const {
  check_site(site, n_);
  const Eigen::Index stride = Eigen::Index{1} << (n_ - 1 - site);
  Mat2 r = Mat2::Zero();
  for (Eigen::Index i = 0; i < amps_.size(); ++i) {
    if (i & stride) continue;
    const cplx a0 = amps_[i];
    const cplx a1 = amps_[i | stride];
    r(0, 0) += a0 * std::conj(a0);
    r(0, 1) += a0 * std::conj(a1);
    r(1, 0) += a1 * std::conj(a0);
    r(1, 1) += a1 * std::conj(a1);
  }
  return r;
}

CMatrix embed_one(const Mat2& op, int site, int n) {
  check_site(site, n);
  const Eigen::Index dim = Eigen::Index{1} << n;
  const Eigen::Index stride = Eigen::Index{1} << (n - 1 - site);
  CMatrix m = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if (i & stride) continue;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) m(i | (r ? stride : 0), i | (c ? stride : 0)) = op(r, c);
  }
  return m;
}

CMatrix embed_two(const Mat4& op, int site, int n) {
  check_site(site, n - 1);
  const Eigen::Index dim = Eigen::Index{1} << n;
  const Eigen::Index hi = Eigen::Index{1} << (n - 1 - site);
  const Eigen::Index lo = hi >> 1;
  CMatrix m = CMatrix::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((i & hi) || (i & lo)) continue;
    const Eigen::Index idx[4] = {i, i | lo, i | hi, i | hi | lo};
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m(idx[r], idx[c]) = op(r, c);
  }
  return m;
}

DenseDensity::DenseDensity(int n, CMatrix rho) : n_(n), rho_(std::move(rho)) {
  if (n < 1 || n > kMaxOracleDensityQubits) throw CapacityError("dense density limited to 6 qubits");
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (rho_.rows() != dim || rho_.cols() != dim) throw ValidationError("density must be 2^n x 2^n");
}

DenseDensity DenseDensity::product(std::string_view bits) {
  const int n = static_cast<int>(bits.size());
  if (n < 1 || n > kMaxOracleDensityQubits) throw CapacityError("dense density limited to 6 qubits");
  const DenseState psi = DenseState::product(bits);
  return DenseDensity(n, psi.amplitudes() * psi.amplitudes().adjoint());
}

void DenseDensity::apply_unitary(const Mat4& u, int site) {
  const CMatrix full = embed_two(u, site, n_);
  rho_ = full * rho_ * full.adjoint();
}

void DenseDensity::apply_channel(const KrausSet& ks, int site) {
  CMatrix out = CMatrix::Zero(rho_.rows(), rho_.cols());
  for (const Mat2& e : ks.ops()) {
    const CMatrix full = embed_one(e, site, n_);
    out += full * rho_ * full.adjoint();
  }
  rho_ = std::move(out);
}

double trace_distance(const CMatrix& a, const CMatrix& b) {
  CMatrix d = a - b;
  d = 0.5 * (d + d.adjoint()).eval();
  return 0.5 * hermitian_eigenvalues(d).cwiseAbs().sum();
}

std::vector<CMatrix> evolve_density(const CircuitPlan& plan, const KrausSet& ks,
                                    std::string_view bits) {
  if (static_cast<int>(bits.size()) != plan.n) throw ValidationError("bitstring length != n");
  DenseDensity rho = DenseDensity::product(bits);
  std::vector<CMatrix> out;
  for (const auto& layer : plan.gates) {
    for (const auto& g : layer) rho.apply_unitary(g.unitary, g.site);
    for (int q = 0; q < plan.n; ++q) rho.apply_channel(ks, q);
    out.push_back(rho.matrix());
  }
  return out;
}

double npc_dense(const DenseState& psi, const KrausSet& f, int site) {
  check_site(site, psi.size());
  double total = 0.0;
  for (const Mat2& fj : f.ops()) {
    DenseState branch = psi;
    branch.apply_one(fj, site);
    const double p = branch.norm2();
    if (p < kZeroProbability) continue;
    const Mat2 q = fj / std::sqrt(p);
    const Mat2 dev = q.adjoint() * q - Mat2::Identity();
    total += p * (dev.adjoint() * dev).trace().real();
  }
  return total;
}

double npc_pauli_analytic(RotationAngles a, double p, double s) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("rate outside [0, 1]");
  const double c = std::cos(a.theta);
  const double sn = std::sin(a.theta);
  const double f1 = (1.0 - p) * c * c + p * sn * sn;
  const double f2 = std::sqrt(p - p * p) * std::sin(2.0 * a.theta) * std::cos(2.0 * a.phi);
  const double num = f1 - f1 * f1 + f2 * f2 + s * (f2 - 2.0 * f1 * f2);
  const double den = f1 - f1 * f1 + s * (f2 - 2.0 * f1 * f2 - s * f2 * f2);
  if (std::abs(den) <= kSingular) throw DomainError("analytic N_pc is singular at this point");
  return 2.0 * (num / den - 1.0);
}

double npc_pauli_haar(RotationAngles a, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("rate outside [0, 1]");
  const double c = std::cos(a.theta);
  const double sn = std::sin(a.theta);
  const double f1 = (1.0 - p) * c * c + p * sn * sn;
  const double f2 = std::sqrt(p - p * p) * std::sin(2.0 * a.theta) * std::cos(2.0 * a.phi);
  const double den = f1 - f1 * f1;
  if (std::abs(den) <= kSingular) throw DomainError("Haar-averaged N_pc is singular at this point");
  return 2.0 * f2 * f2 / den;
}

double ad_branch_probability(const TwoQubitAmps& s, RotationAngles a, double p, int branch) {
  if (branch != 0 && branch != 1) throw DomainError("branch must be 0 or 1");
  const AdTerms t = ad_terms(s);
  const double cross = std::sqrt(p) * std::sin(2.0 * a.theta) *
                       (t.z * std::polar(1.0, -2.0 * a.phi)).real();
  const double c2 = std::cos(2.0 * a.theta);
  const double c = std::cos(a.theta);
  const double sn = std::sin(a.theta);
  return branch == 0 ? c * c - p * t.y * c2 + cross : sn * sn + p * t.y * c2 - cross;
}

double ad_branch_concurrence(const TwoQubitAmps& s, RotationAngles a, double p, int branch) {
  const double norm = ad_branch_probability(s, a, p, branch);
  if (!(norm > kSingular)) throw DomainError("branch probability vanishes");
  return std::sqrt(1.0 - p) * std::sqrt(alpha4(a, branch)) * ad_terms(s).c0 / norm;
}

EigenPair ad_reduced_eigenvalues(const TwoQubitAmps& s, RotationAngles a, double p, int branch) {
  const double norm = ad_branch_probability(s, a, p, branch);
  if (!(norm > kSingular)) throw DomainError("branch probability vanishes");
  const double c0 = ad_terms(s).c0;
  const double inner = 1.0 - (1.0 - p) * alpha4(a, branch) * c0 * c0 / (norm * norm);
  const double root = std::sqrt(std::max(inner, 0.0));
  return {0.5 + 0.5 * root, 0.5 - 0.5 * root};
}

double optimal_theta_condition(const TwoQubitAmps& s, RotationAngles a, double p) {
  const AdTerms t = ad_terms(s);
  return std::abs(std::cos(2.0 * a.theta) * p * t.y -
                  std::sin(2.0 * a.theta) * std::sqrt(p) *
                      (t.z * std::polar(1.0, -2.0 * a.phi)).real());
}

double concurrence2q(const CVector& psi) {
  if (psi.size() != 4) throw ValidationError("two-qubit state needs 4 amplitudes");
  const double n2 = psi.squaredNorm();
  if (!(n2 > 0.0)) throw DomainError("zero state");
  return 2.0 * std::abs(psi[0] * psi[3] - psi[1] * psi[2]) / n2;
}

double concurrence2q(const CMatrix& rho) {
  if (rho.rows() != 4 || rho.cols() != 4) throw ValidationError("two-qubit density must be 4x4");
  const double tr = rho.trace().real();
  if (!(tr > 0.0)) throw DomainError("zero density matrix");
  const Eigen::Matrix4cd r = rho / tr;
  return wootters(r);
}

double eof2q(double concurrence) {
  const double c = std::clamp(concurrence, 0.0, 1.0);
  return binary_entropy(0.5 * (1.0 + std::sqrt(1.0 - c * c)));
}

std::vector<Fig2Point> fig2_sweep(ChannelKind channel, double rate, int samples,
                                  std::uint64_t seed) {
  if (samples < 2) throw DomainError("fig2 sweep needs at least 2 samples");
  const KrausSet ks = make_channel(channel, rate);
  constexpr int kGrid = 6;
  std::vector<KrausSet> rotated;
  std::vector<Fig2Point> pts;
  for (int i = 0; i < kGrid; ++i)
    for (int j = 0; j < kGrid; ++j) {
      const RotationAngles a{i * kPi / 20, j * kPi / 20};
      rotated.push_back(rotate(ks, a));
      pts.push_back({a.theta, a.phi, 0, 0, 0, 0});
    }
  const std::size_t g = pts.size();
  std::vector<double> ex_sum(g, 0.0), ex_sq(g, 0.0), np_sum(g, 0.0), np_sq(g, 0.0);
  CounterRng rng = CounterRng::stream(seed, 0xF162);
  for (int s = 0; s < samples; ++s) {
    const DenseState psi = DenseState::random(2, rng);
    CMatrix rho = CMatrix::Zero(4, 4);
    for (const Mat2& e : ks.ops()) {
      DenseState b = psi;
      b.apply_one(e, 1);
      rho += b.amplitudes() * b.amplitudes().adjoint();
    }
    const double ef = eof2q(concurrence2q(rho));
    for (std::size_t k = 0; k < g; ++k) {
      double spc = 0.0;
      for (const Mat2& f : rotated[k].ops()) {
        DenseState b = psi;
        b.apply_one(f, 1);
        const double p = b.norm2();
        if (p < kZeroProbability) continue;
        spc += p * eof2q(concurrence2q(b.amplitudes()));
      }
      const double ex = spc - ef;
      const double np = -npc_dense(psi, rotated[k], 1);
      ex_sum[k] += ex;
      ex_sq[k] += ex * ex;
      np_sum[k] += np;
      np_sq[k] += np * np;
    }
  }
  const double n = samples;
  for (std::size_t k = 0; k < g; ++k) {
    auto finish = [n](double sum, double sq, double& mean, double& se) {
      mean = sum / n;
      se = std::sqrt(std::max(0.0, (sq - sum * mean) / (n - 1)) / n);
    };
    finish(ex_sum[k], ex_sq[k], pts[k].excess_te, pts[k].excess_te_se);
    finish(np_sum[k], np_sq[k], pts[k].neg_npc, pts[k].neg_npc_se);
  }
  return pts;
}

void write_fig2_csv(const std::vector<Fig2Point>& pts, std::ostream& out) {
  out << "theta,phi,excess_te,excess_te_se,neg_npc,neg_npc_se\n";
  for (const auto& p : pts) {
    out << format_double(p.theta) << ',' << format_double(p.phi) << ','
        << format_double(p.excess_te) << ',' << format_double(p.excess_te_se) << ','
        << format_double(p.neg_npc) << ',' << format_double(p.neg_npc_se) << '\n';
  }
}

}  // namespace qtraj
