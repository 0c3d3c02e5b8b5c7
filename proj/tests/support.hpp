#pragma once

// Test-only reference computations. Nothing here calls into the library's numerics.

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace support {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

inline Vec random_state(int n, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Vec v(1 << n);
  for (auto& x : v) x = cplx(g(gen), g(gen));
  return v.normalized();
}

inline Mat random_unitary(int dim, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  Mat z(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) z(r, c) = cplx(g(gen), g(gen));
  // Gram-Schmidt, column by column.
  Mat q = z;
  for (int c = 0; c < dim; ++c) {
    for (int k = 0; k < c; ++k) q.col(c) -= q.col(k).dot(q.col(c)) * q.col(k);
    q.col(c).normalize();
  }
  return q;
}

// Kronecker product built entry by entry.
inline Mat kron(const Mat& a, const Mat& b) {
  Mat m(a.rows() * b.rows(), a.cols() * b.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) m.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return m;
}

// op on qubit `site` of n (site 0 most significant).
inline Mat on_site(const Mat& op, int site, int n) {
  const int k = op.rows() == 2 ? 1 : 2;
  Mat left = Mat::Identity(1 << site, 1 << site);
  Mat right = Mat::Identity(1 << (n - site - k), 1 << (n - site - k));
  return kron(kron(left, op), right);
}

// Partial trace keeping qubits [0, cut).
inline Mat reduced_left(const Vec& psi, int n, int cut) {
  const int dl = 1 << cut, dr = 1 << (n - cut);
  Mat m(dl, dr);
  for (int i = 0; i < dl; ++i)
    for (int j = 0; j < dr; ++j) m(i, j) = psi[i * dr + j];
  return m * m.adjoint();
}

// Schmidt probabilities across a cut, descending, via the reduced density matrix.
inline std::vector<double> schmidt_probs(const Vec& psi, int n, int cut) {
  Eigen::SelfAdjointEigenSolver<Mat> es(reduced_left(psi, n, cut));
  std::vector<double> p;
  for (int k = es.eigenvalues().size() - 1; k >= 0; --k) p.push_back(std::max(0.0, es.eigenvalues()[k]));
  return p;
}

inline double entropy_bits(const std::vector<double>& p) {
  double s = 0;
  for (double x : p)
    if (x > 1e-300) s -= x * std::log(x) / std::log(2.0);
  return s;
}

}  // namespace support
