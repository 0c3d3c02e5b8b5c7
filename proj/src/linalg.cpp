#include "qtraj/linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "qtraj/errors.hpp"

#include <complex>
#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace qtraj {
namespace {

template <typename Scalar>
ThinSvd<Scalar> eigen_svd(const MatrixOf<Scalar>& a) {
  Eigen::BDCSVD<MatrixOf<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU(), svd.singularValues(), svd.matrixV().adjoint()};
}

template <typename Scalar>
ThinQr<Scalar> eigen_qr(const MatrixOf<Scalar>& a) {
  const Eigen::Index k = std::min(a.rows(), a.cols());
  Eigen::HouseholderQR<MatrixOf<Scalar>> qr(a);
  return {qr.householderQ() * MatrixOf<Scalar>::Identity(a.rows(), k),
          qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>()};
}

constexpr Eigen::Index kSmallHermitian = 16;

// Householder reduction of a Hermitian matrix to a real symmetric tridiagonal one,
// in split real/imaginary storage. Subdiagonal entries are kept as magnitudes, which
// leaves the spectrum unchanged. Only the lower triangle is read and updated.
void tridiagonalize(const CMatrix& h, double* d, double* e) {
  constexpr Eigen::Index N = kSmallHermitian;
  const int n = static_cast<int>(h.rows());
  std::array<double, N * N> ar, ai;
  for (int c = 0; c < n; ++c)
    for (int r = c; r < n; ++r) {
      ar[r * N + c] = h(r, c).real();
      ai[r * N + c] = h(r, c).imag();
    }
  // Full Hermitian access from the lower triangle.
  auto re = [&](int r, int c) { return r >= c ? ar[r * N + c] : ar[c * N + r]; };
  auto im = [&](int r, int c) { return r >= c ? ai[r * N + c] : -ai[c * N + r]; };
  std::array<double, N> vr, vi, pr, pi;
  for (int k = 0; k + 2 < n; ++k) {
    d[k] = ar[k * N + k];
    const int o = k + 1;
    const int m = n - o;
    double alpha2 = 0.0;
    for (int i = 0; i < m; ++i) {
      vr[i] = ar[(o + i) * N + k];
      vi[i] = ai[(o + i) * N + k];
      alpha2 += vr[i] * vr[i] + vi[i] * vi[i];
    }
    const double alpha = std::sqrt(alpha2);
    e[k] = alpha;
    if (alpha == 0.0) continue;
    const double r0 = std::sqrt(vr[0] * vr[0] + vi[0] * vi[0]);
    const double phr = r0 > 0.0 ? vr[0] / r0 : 1.0;
    const double phi = r0 > 0.0 ? vi[0] / r0 : 0.0;
    vr[0] += phr * alpha;
    vi[0] += phi * alpha;
    const double inv_beta = 1.0 / (alpha * (alpha + r0));  // 2 / |v|^2
    // p = B v / beta, then p -= (v^dag p / (2 beta)) v; B <- B - v p^dag - p v^dag.
    double kr = 0.0, ki = 0.0;
    for (int i = 0; i < m; ++i) {
      double sr = 0.0, si = 0.0;
      for (int j = 0; j < m; ++j) {
        const double br = re(o + i, o + j), bi = im(o + i, o + j);
        sr += br * vr[j] - bi * vi[j];
        si += br * vi[j] + bi * vr[j];
      }
      pr[i] = sr * inv_beta;
      pi[i] = si * inv_beta;
      kr += vr[i] * pr[i] + vi[i] * pi[i];
      ki += vr[i] * pi[i] - vi[i] * pr[i];
    }
    kr *= 0.5 * inv_beta;
    ki *= 0.5 * inv_beta;
    for (int i = 0; i < m; ++i) {
      pr[i] -= kr * vr[i] - ki * vi[i];
      pi[i] -= kr * vi[i] + ki * vr[i];
    }
    for (int j = 0; j < m; ++j)
      for (int i = j; i < m; ++i) {
        // v_i conj(p_j) + p_i conj(v_j)
        ar[(o + i) * N + (o + j)] -= vr[i] * pr[j] + vi[i] * pi[j] + pr[i] * vr[j] + pi[i] * vi[j];
        ai[(o + i) * N + (o + j)] -= vi[i] * pr[j] - vr[i] * pi[j] + pi[i] * vr[j] - pr[i] * vi[j];
      }
  }
  if (n >= 2) {
    d[n - 2] = ar[(n - 2) * N + (n - 2)];
    const double xr = ar[(n - 1) * N + (n - 2)], xi = ai[(n - 1) * N + (n - 2)];
    e[n - 2] = std::sqrt(xr * xr + xi * xi);
  }
  d[n - 1] = ar[(n - 1) * N + (n - 1)];
  e[n - 1] = 0.0;
}

// Eigenvalues of a symmetric tridiagonal matrix by implicit QL with Wilkinson shifts;
// e[i] couples i and i + 1. Overwrites d with the eigenvalues.
void tridiagonal_ql(double* d, double* e, int n) {
  constexpr int kMaxIter = 60;
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
      }
      if (m == l) break;
      if (++iter > kMaxIter) throw Error("tridiagonal QL did not converge");
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = std::sqrt(g * g + 1.0);
      g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? r : -r));
      double s = 1.0, c = 1.0, p = 0.0;
      int i = m - 1;
      for (; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = std::sqrt(f * f + g * g);
        e[i + 1] = r;
        if (r == 0.0) {
          d[i + 1] -= p;
          e[m] = 0.0;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;
      }
      if (r == 0.0 && i >= l) continue;
      d[l] -= p;
      e[l] = g;
      e[m] = 0.0;
    } while (m != l);
  }
}

}  // namespace

ThinSvd<cplx> thin_svd(const CMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  ThinSvd<cplx> out{CMatrix(m, k), RVector(k), CMatrix(k, n)};
  CMatrix work = a;
  const lapack_int info =
      LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, out.s.data(), out.u.data(),
                     m, out.vh.data(), k);
  if (info != 0 || !out.s.allFinite()) return eigen_svd<cplx>(a);
  return out;
}

ThinSvd<double> thin_svd(const RMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  ThinSvd<double> out{RMatrix(m, k), RVector(k), RMatrix(k, n)};
  RMatrix work = a;
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'S', m, n, work.data(), m, out.s.data(), out.u.data(),
                     m, out.vh.data(), k);
  if (info != 0 || !out.s.allFinite()) return eigen_svd<double>(a);
  return out;
}

ThinQr<cplx> thin_qr(const CMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  if (k == 0) return eigen_qr<cplx>(a);
  CMatrix work = a;
  CVector tau(k);
  if (LAPACKE_zgeqrf(LAPACK_COL_MAJOR, m, n, work.data(), m, tau.data()) != 0) {
    return eigen_qr<cplx>(a);
  }
  ThinQr<cplx> out;
  out.r = work.topRows(k).triangularView<Eigen::Upper>();
  out.q = work.leftCols(k);
  if (LAPACKE_zungqr(LAPACK_COL_MAJOR, m, k, k, out.q.data(), m, tau.data()) != 0) {
    return eigen_qr<cplx>(a);
  }
  return out;
}

ThinQr<double> thin_qr(const RMatrix& a) {
  const lapack_int m = static_cast<lapack_int>(a.rows());
  const lapack_int n = static_cast<lapack_int>(a.cols());
  const lapack_int k = std::min(m, n);
  if (k == 0) return eigen_qr<double>(a);
  RMatrix work = a;
  RVector tau(k);
  if (LAPACKE_dgeqrf(LAPACK_COL_MAJOR, m, n, work.data(), m, tau.data()) != 0) {
    return eigen_qr<double>(a);
  }
  ThinQr<double> out;
  out.r = work.topRows(k).triangularView<Eigen::Upper>();
  out.q = work.leftCols(k);
  if (LAPACKE_dorgqr(LAPACK_COL_MAJOR, m, k, k, out.q.data(), m, tau.data()) != 0) {
    return eigen_qr<double>(a);
  }
  return out;
}

RVector hermitian_eigenvalues(const CMatrix& h) {
  if (h.rows() == 1) return RVector::Constant(1, h(0, 0).real());
  if (h.rows() == 2) {
    const double a = h(0, 0).real();
    const double d = h(1, 1).real();
    const double half_diff = 0.5 * (a - d);
    const double half_gap = std::sqrt(half_diff * half_diff + std::norm(h(0, 1)));
    RVector w(2);
    w << 0.5 * (a + d) - half_gap, 0.5 * (a + d) + half_gap;
    return w;
  }
  if (h.rows() <= kSmallHermitian) {
    const int n = static_cast<int>(h.rows());
    RVector w(n);
    std::array<double, kSmallHermitian> e;
    tridiagonalize(h, w.data(), e.data());
    tridiagonal_ql(w.data(), e.data(), n);
    std::sort(w.data(), w.data() + n);
    return w;
  }
  const lapack_int n = static_cast<lapack_int>(h.rows());
  CMatrix work = h;
  RVector w(n);
  if (LAPACKE_zheevd(LAPACK_COL_MAJOR, 'N', 'L', n, work.data(), n, w.data()) == 0) return w;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

TruncationResult truncation_rank(const RVector& s, Eigen::Index chi_max, double floor) {
  const Eigen::Index total = s.size();
  Eigen::Index keep = 0;
  while (keep < total && keep < chi_max && s[keep] > floor) ++keep;
  keep = std::max<Eigen::Index>(keep, 1);
  const double norm2 = s.squaredNorm();
  const double tail2 = s.tail(total - keep).squaredNorm();
  return {keep, norm2 > 0.0 ? tail2 / norm2 : 0.0};
}

}  // namespace qtraj
