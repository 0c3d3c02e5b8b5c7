#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "qtraj/errors.hpp"
#include "qtraj/linalg.hpp"

namespace qtraj {

// Unit-norm matrix product vector in mixed-canonical form.
//
// Sites left of the center are left-orthonormal, sites right of it are
// right-orthonormal, and the center carries the whole norm. Each site is stored as
// D slices of shape chi_left x chi_right. lambda(b) holds the Schmidt coefficients of
// bond b (between sites b and b+1), unit 2-norm, whenever fresh(b) is set.
//
// Unitary two-site updates keep every other bond fresh; any non-unitary local update
// stales all bonds until canonicalize() runs.
template <typename Scalar, int D>
class CanonicalChain {
 public:
  using Mat = MatrixOf<Scalar>;
  using Site = std::array<Mat, D>;
  using Local = std::array<Scalar, D>;

  struct PairResult {
    double discarded = 0.0;  // relative squared weight dropped by truncation
    double norm2 = 1.0;      // squared norm after the operator, before renormalization
    Eigen::Index kept = 1;
  };

  CanonicalChain() = default;

  static CanonicalChain product(const std::vector<Local>& locals, Eigen::Index chi_max,
                                double svd_floor) {
    if (locals.empty()) throw DomainError("chain needs at least one site");
    CanonicalChain c;
    c.init_meta(static_cast<int>(locals.size()), chi_max, svd_floor);
    for (std::size_t k = 0; k < locals.size(); ++k) {
      double norm2 = 0.0;
      for (int i = 0; i < D; ++i) norm2 += std::norm(locals[k][i]);
      if (!(norm2 > 0.0)) throw DomainError("product state site has zero norm");
      for (int i = 0; i < D; ++i) {
        c.sites_[k][i] = Mat::Constant(1, 1, locals[k][i] / static_cast<Scalar>(std::sqrt(norm2)));
      }
    }
    for (auto& l : c.lambda_) l = RVector::Ones(1);
    std::fill(c.fresh_.begin(), c.fresh_.end(), 1);
    c.center_ = 0;
    return c;
  }

  // Exact encoding of a D^n amplitude vector (site 0 is the most significant digit).
  static CanonicalChain from_vector(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& psi, int n,
                                    Eigen::Index chi_max, double svd_floor) {
    Eigen::Index total = 1;
    for (int k = 0; k < n; ++k) total *= D;
    if (psi.size() != total) throw ValidationError("vector size does not match D^n");
    const double norm = psi.norm();
    if (!(norm > 0.0)) throw DomainError("cannot encode a zero vector");
    CanonicalChain c;
    c.init_meta(n, chi_max, svd_floor);
    Mat rest = psi.transpose() / static_cast<Scalar>(norm);  // 1 x D^n
    Eigen::Index tail = total;
    for (int k = 0; k + 1 < n; ++k) {
      const Eigen::Index chil = rest.rows();
      tail /= D;
      Mat x(D * chil, tail);
      for (int i = 0; i < D; ++i) x.middleRows(i * chil, chil) = rest.middleCols(i * tail, tail);
      auto svd = thin_svd(x);
      const auto tr = truncation_rank(svd.s, chi_max, svd_floor);
      c.discarded_ += tr.discarded;
      for (int i = 0; i < D; ++i) c.sites_[k][i] = svd.u.block(i * chil, 0, chil, tr.kept);
      RVector s = svd.s.head(tr.kept);
      s /= s.norm();
      rest = s.asDiagonal() * svd.vh.topRows(tr.kept);
      c.lambda_[k] = s;
      c.fresh_[k] = 1;
    }
    for (int i = 0; i < D; ++i) c.sites_[n - 1][i] = rest.col(i);
    c.center_ = n - 1;
    return c;
  }

  int size() const { return n_; }
  int center() const { return center_; }
  Eigen::Index chi_max() const { return chi_max_; }
  double svd_floor() const { return floor_; }
  Eigen::Index bond_dim(int b) const { return sites_[b][0].cols(); }
  Eigen::Index max_bond_dim() const {
    Eigen::Index m = 1;
    for (int b = 0; b + 1 < n_; ++b) m = std::max(m, bond_dim(b));
    return m;
  }
  const Site& site(int k) const { return sites_[k]; }
  bool fresh(int b) const { return fresh_[b] != 0; }
  bool all_fresh() const {
    return std::all_of(fresh_.begin(), fresh_.end(), [](char f) { return f != 0; });
  }
  // Sum of all discarded weights since construction.
  double discarded_total() const { return discarded_; }

  const RVector& lambda(int b) const {
    check_bond(b);
    if (!fresh_[b]) {
      throw StaleSpectrumError("bond " + std::to_string(b) + " spectrum is stale; canonicalize first");
    }
    return lambda_[b];
  }

  // Moves the orthogonality center. With refresh, each step is an SVD that renews the
  // crossed bond's spectrum; otherwise a cheaper QR step that leaves flags untouched.
  void move_center(int target, bool refresh = false) {
    check_site(target);
    while (center_ < target) step_right(refresh);
    while (center_ > target) step_left(refresh);
  }

  const Site& center_tensor() const { return sites_[center_]; }

  // Replaces the center tensor; the new tensor is renormalized and all bonds go stale.
  // Returns the squared norm of the supplied tensor.
  double replace_center(Site t) {
    const double norm2 = site_norm2(t);
    if (!(norm2 > 0.0)) throw ZeroProbabilityError("replacement center tensor has zero norm");
    for (auto& m : t) m /= static_cast<Scalar>(std::sqrt(norm2));
    sites_[center_] = std::move(t);
    mark_all_stale();
    return norm2;
  }

  // Applies a D x D operator at site k (center moves there). Returns the squared norm
  // before renormalization; all bonds go stale.
  double apply_local(int k, const Mat& op) {
    move_center(k);
    Site out;
    const Site& c = sites_[k];
    for (int i = 0; i < D; ++i) {
      out[i] = Mat::Zero(c[0].rows(), c[0].cols());
      for (int j = 0; j < D; ++j) {
        if (op(i, j) != Scalar(0)) out[i] += op(i, j) * c[j];
      }
    }
    const double norm2 = site_norm2(out);
    if (!(norm2 > 0.0)) throw ZeroProbabilityError("local operator annihilated the state");
    for (auto& m : out) m /= static_cast<Scalar>(std::sqrt(norm2));
    sites_[k] = std::move(out);
    mark_all_stale();
    return norm2;
  }

  // Applies a D^2 x D^2 operator to sites (b, b+1), index (i, j) -> i * D + j with i on
  // site b. Truncates to min(chi_max, #{s > floor}) and renormalizes. The center ends on
  // b + 1 if it was at or left of b, else on b. Bond b becomes fresh; other bonds keep
  // their flags, which is exact for unitary operators.
  PairResult apply_pair(int b, const Mat& op) {
    check_bond(b);
    const bool rightward = center_ <= b;
    move_center(rightward ? b : b + 1);
    const Site& l = sites_[b];
    const Site& r = sites_[b + 1];
    const Eigen::Index chil = l[0].rows();
    const Eigen::Index chir = r[0].cols();

    std::array<Mat, D * D> theta;
    for (int i = 0; i < D; ++i)
      for (int j = 0; j < D; ++j) theta[i * D + j] = l[i] * r[j];

    Mat big = Mat::Zero(D * chil, D * chir);
    for (int out = 0; out < D * D; ++out) {
      auto block = big.block((out / D) * chil, (out % D) * chir, chil, chir);
      for (int in = 0; in < D * D; ++in) {
        const Scalar w = op(out, in);
        if (w != Scalar(0)) block += w * theta[in];
      }
    }

    auto svd = thin_svd(big);
    PairResult res;
    res.norm2 = svd.s.squaredNorm();
    if (!(res.norm2 > 0.0)) throw ZeroProbabilityError("two-site operator annihilated the state");
    const auto tr = truncation_rank(svd.s, chi_max_, floor_);
    res.discarded = tr.discarded;
    res.kept = tr.kept;
    discarded_ += tr.discarded;
    RVector s = svd.s.head(tr.kept);
    s /= s.norm();

    Site nl, nr;
    if (rightward) {
      for (int i = 0; i < D; ++i) nl[i] = svd.u.block(i * chil, 0, chil, tr.kept);
      for (int j = 0; j < D; ++j) {
        nr[j] = s.asDiagonal() * svd.vh.block(0, j * chir, tr.kept, chir);
      }
      center_ = b + 1;
    } else {
      for (int i = 0; i < D; ++i) {
        nl[i] = svd.u.block(i * chil, 0, chil, tr.kept) * s.asDiagonal();
      }
      for (int j = 0; j < D; ++j) nr[j] = svd.vh.block(0, j * chir, tr.kept, chir);
      center_ = b;
    }
    sites_[b] = std::move(nl);
    sites_[b + 1] = std::move(nr);
    lambda_[b] = std::move(s);
    fresh_[b] = 1;
    return res;
  }

  // Refreshes every stale bond with the fewest SVD steps.
  void canonicalize() {
    int lo = -1, hi = -1;
    for (int b = 0; b + 1 < n_; ++b) {
      if (!fresh_[b]) {
        if (lo < 0) lo = b;
        hi = b;
      }
    }
    if (lo < 0) return;
    // Sweep either lo -> hi+1 or hi+1 -> lo, whichever needs the shorter approach.
    if (std::abs(center_ - lo) <= std::abs(center_ - (hi + 1))) {
      move_center(lo);
      move_center(hi + 1, true);
    } else {
      move_center(hi + 1);
      move_center(lo, true);
    }
  }

  // Gram matrix g(a, b) = <C_a, C_b> of the center tensor slices.
  Eigen::Matrix<Scalar, D, D> center_gram() const {
    Eigen::Matrix<Scalar, D, D> g;
    const Site& c = sites_[center_];
    // Hermitian: one pass per upper-triangle entry.
    for (int a = 0; a < D; ++a)
      for (int b = a; b < D; ++b) {
        g(a, b) = c[a].reshaped().dot(c[b].reshaped());
        if (b != a) g(b, a) = Eigen::numext::conj(g(a, b));
      }
    return g;
  }

  // sum_{i_0..i_{n-1}} prod_k w_k[i_k] psi[i_0..i_{n-1}].
  Scalar contract(const std::vector<Local>& w) const {
    if (static_cast<int>(w.size()) != n_) throw ValidationError("one covector per site needed");
    Mat env = Mat::Ones(1, 1);
    for (int k = 0; k < n_; ++k) {
      Mat next = Mat::Zero(1, sites_[k][0].cols());
      for (int i = 0; i < D; ++i) {
        if (w[k][i] != Scalar(0)) next += w[k][i] * (env * sites_[k][i]);
      }
      env = std::move(next);
    }
    return env(0, 0);
  }

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> to_vector() const {
    Mat psi = Mat::Ones(1, 1);  // rows: prefix index, cols: open bond
    for (int k = 0; k < n_; ++k) {
      const Eigen::Index rows = psi.rows();
      Mat next(rows * D, sites_[k][0].cols());
      for (Eigen::Index p = 0; p < rows; ++p)
        for (int i = 0; i < D; ++i) next.row(p * D + i) = psi.row(p) * sites_[k][i];
      psi = std::move(next);
    }
    return psi.col(0);
  }

 private:
  void init_meta(int n, Eigen::Index chi_max, double svd_floor) {
    if (chi_max < 1) throw DomainError("chi_max must be >= 1");
    n_ = n;
    chi_max_ = chi_max;
    floor_ = svd_floor;
    sites_.assign(n, Site{});
    lambda_.assign(std::max(n - 1, 0), RVector::Ones(1));
    fresh_.assign(std::max(n - 1, 0), 0);
  }

  void check_site(int k) const {
    if (k < 0 || k >= n_) throw DomainError("site " + std::to_string(k) + " out of range");
  }
  void check_bond(int b) const {
    if (b < 0 || b + 1 >= n_) throw DomainError("bond " + std::to_string(b) + " out of range");
  }

  static double site_norm2(const Site& t) {
    double s = 0.0;
    for (const auto& m : t) s += m.squaredNorm();
    return s;
  }

  void mark_all_stale() { std::fill(fresh_.begin(), fresh_.end(), 0); }

  void step_right(bool refresh) {
    const int k = center_;
    Site& c = sites_[k];
    Site& next = sites_[k + 1];
    const Eigen::Index chil = c[0].rows();
    const Eigen::Index chir = c[0].cols();
    Mat x(D * chil, chir);
    for (int i = 0; i < D; ++i) x.middleRows(i * chil, chil) = c[i];
    Mat carry;
    if (refresh) {
      auto svd = thin_svd(x);
      const auto tr = truncation_rank(svd.s, svd.s.size(), floor_);
      discarded_ += tr.discarded;
      for (int i = 0; i < D; ++i) c[i] = svd.u.block(i * chil, 0, chil, tr.kept);
      RVector s = svd.s.head(tr.kept);
      s /= s.norm();
      carry = s.asDiagonal() * svd.vh.topRows(tr.kept);
      lambda_[k] = std::move(s);
      fresh_[k] = 1;
    } else {
      auto qr = thin_qr(x);
      carry = std::move(qr.r);
      for (int i = 0; i < D; ++i) c[i] = qr.q.middleRows(i * chil, chil);
    }
    for (int i = 0; i < D; ++i) next[i] = carry * next[i];
    center_ = k + 1;
  }

  void step_left(bool refresh) {
    const int k = center_;
    Site& c = sites_[k];
    Site& prev = sites_[k - 1];
    const Eigen::Index chil = c[0].rows();
    const Eigen::Index chir = c[0].cols();
    Mat x(chil, D * chir);
    for (int i = 0; i < D; ++i) x.middleCols(i * chir, chir) = c[i];
    Mat carry;
    if (refresh) {
      auto svd = thin_svd(x);
      const auto tr = truncation_rank(svd.s, svd.s.size(), floor_);
      discarded_ += tr.discarded;
      for (int i = 0; i < D; ++i) c[i] = svd.vh.block(0, i * chir, tr.kept, chir);
      RVector s = svd.s.head(tr.kept);
      s /= s.norm();
      carry = svd.u.leftCols(tr.kept) * s.asDiagonal();
      lambda_[k - 1] = std::move(s);
      fresh_[k - 1] = 1;
    } else {
      auto qr = thin_qr(Mat(x.adjoint()));
      const Mat qh = qr.q.adjoint();
      for (int i = 0; i < D; ++i) c[i] = qh.middleCols(i * chir, chir);
      carry = qr.r.adjoint();
    }
    for (int i = 0; i < D; ++i) prev[i] = prev[i] * carry;
    center_ = k - 1;
  }

  int n_ = 0;
  Eigen::Index chi_max_ = 1;
  double floor_ = 1e-12;
  int center_ = 0;
  double discarded_ = 0.0;
  std::vector<Site> sites_;
  std::vector<RVector> lambda_;
  std::vector<char> fresh_;
};

}  // namespace qtraj
