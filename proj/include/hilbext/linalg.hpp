#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace hilbext {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace linalg {

/// Largest singular value; zero for empty matrices.
inline double op_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

inline Matrix hermitian_part(const Matrix& a) { return (a + a.adjoint()) * 0.5; }

/// Number of eigenvalues of the Hermitian part above the 0.5 separator.
inline int projection_rank(const Matrix& p, double threshold = 0.5) {
  if (p.size() == 0) return 0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(p), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](double x) { return x > threshold; }));
}

/// Orthonormal basis (columns) of the range of a numerical projection.
inline Matrix fiber_basis(const Matrix& p, double threshold = 0.5) {
  const auto n = p.rows();
  if (n == 0) return Matrix(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(hermitian_part(p));
  // eigenvalues are ascending, so the range sits in the trailing columns
  int r = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    if (es.eigenvalues()(i) > threshold) ++r;
  return es.eigenvectors().rightCols(r);
}

/// Isometric factor U of the polar decomposition M = U |M| (M with full column rank).
inline Matrix polar_factor(const Matrix& m) {
  if (m.size() == 0) return m;
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Columns completing the orthonormal columns of `a` to a unitary.
inline Matrix orthonormal_complement(const Matrix& a) {
  const auto m = a.rows();
  const auto k = a.cols();
  if (k == 0) return Matrix::Identity(m, m);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(m, m);
  return q.rightCols(m - k);
}

/// Principal logarithm of a unitary matrix (skew-Hermitian, spectrum in i(-pi, pi]).
inline Matrix unitary_log(const Matrix& u) {
  if (u.size() == 0) return u;
  Eigen::ComplexSchur<Matrix> schur(u);
  const Matrix& t = schur.matrixT();
  const Matrix& q = schur.matrixU();
  Vector logs(t.rows());
  for (Eigen::Index i = 0; i < t.rows(); ++i) logs(i) = cplx(0.0, std::arg(t(i, i)));
  return q * logs.asDiagonal() * q.adjoint();
}

/// exp of a skew-Hermitian matrix, computed through the Hermitian eigenproblem.
inline Matrix skew_exp(const Matrix& l) {
  if (l.size() == 0) return l;
  const Matrix h = hermitian_part(cplx(0.0, -1.0) * l);
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Vector phases(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) phases(i) = std::polar(1.0, es.eigenvalues()(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Principal argument of b / a, i.e. the shortest signed rotation from a to b.
inline double arg_increment(cplx a, cplx b) { return std::arg(b * std::conj(a)); }

inline Matrix random_gaussian(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n01(0.0, 1.0);
  Matrix g(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) g(i, j) = cplx(n01(rng), n01(rng));
  return g;
}

/// Haar-distributed m x k isometry (orthonormal columns).
inline Matrix random_isometry(Eigen::Index m, Eigen::Index k, std::mt19937_64& rng) {
  Matrix g = random_gaussian(m, m, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(m, m);
  const Matrix& r = qr.matrixQR();
  for (Eigen::Index j = 0; j < m; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q.leftCols(k);
}

inline Matrix random_unitary(Eigen::Index m, std::mt19937_64& rng) { return random_isometry(m, m, rng); }

}  // namespace linalg
}  // namespace hilbext
