#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace qtraj {

using cplx = std::complex<double>;

template <typename Scalar>
using MatrixOf = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using CMatrix = MatrixOf<cplx>;
using RMatrix = MatrixOf<double>;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Mat2 = Eigen::Matrix<cplx, 2, 2, Eigen::RowMajor>;
using Mat4 = Eigen::Matrix<cplx, 4, 4, Eigen::RowMajor>;

inline constexpr double kPi = 3.14159265358979323846;

template <typename Scalar>
struct ThinSvd {
  MatrixOf<Scalar> u;   // m x k, orthonormal columns
  RVector s;            // k, descending
  MatrixOf<Scalar> vh;  // k x n, orthonormal rows
};

// a = u * diag(s) * vh with k = min(m, n). LAPACK gesdd with an Eigen fallback.
ThinSvd<cplx> thin_svd(const CMatrix& a);
ThinSvd<double> thin_svd(const RMatrix& a);

template <typename Scalar>
struct ThinQr {
  MatrixOf<Scalar> q;  // m x k, orthonormal columns
  MatrixOf<Scalar> r;  // k x n, upper triangular
};

// a = q * r with k = min(m, n). LAPACK geqrf/ungqr with an Eigen fallback.
ThinQr<cplx> thin_qr(const CMatrix& a);
ThinQr<double> thin_qr(const RMatrix& a);

// Eigenvalues of a Hermitian matrix in ascending order: closed form up to 2x2,
// Householder plus QL up to 16x16, LAPACK heevd beyond.
RVector hermitian_eigenvalues(const CMatrix& h);

struct TruncationResult {
  Eigen::Index kept = 0;
  double discarded = 0.0;  // discarded squared weight relative to the total
};

// Keep min(chi_max, #{s > floor}) values (at least one) of a descending spectrum.
TruncationResult truncation_rank(const RVector& s, Eigen::Index chi_max, double floor);

// max |a - b| entrywise.
template <typename A, typename B>
double max_abs_diff(const A& a, const B& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace qtraj
