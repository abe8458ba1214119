#pragma once

#include <complex>
#include <memory>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "hilbext/hilbext.hpp"

namespace fixture {

using hilbext::cplx;
using hilbext::Matrix;

inline Matrix random_hermitian(Eigen::Index m, std::mt19937_64& rng, double scale) {
  const Matrix g = hilbext::linalg::random_gaussian(m, m, rng);
  return scale * (g + g.adjoint()) / 2.0;
}

/// exp(i h) for Hermitian h.
inline Matrix expi(const Matrix& h) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  Eigen::VectorXcd d(h.rows());
  for (Eigen::Index i = 0; i < h.rows(); ++i) d(i) = std::polar(1.0, es.eigenvalues()(i));
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

inline Matrix diag_projection(Eigen::Index m, Eigen::Index k) {
  Matrix p = Matrix::Zero(m, m);
  for (Eigen::Index i = 0; i < k; ++i) p(i, i) = 1.0;
  return p;
}

/// Rank-k field U(v) diag(1..1, 0..0) U(v)^* with U depending smoothly on the planar coordinates.
inline hilbext::BundlePtr smooth_field(const hilbext::SpacePtr& space, Eigen::Index m, Eigen::Index k,
                                       std::mt19937_64& rng, double scale = 0.3) {
  const Matrix h1 = random_hermitian(m, rng, scale);
  const Matrix h2 = random_hermitian(m, rng, scale);
  const Matrix h0 = random_hermitian(m, rng, 1.0);
  const Matrix p0 = diag_projection(m, k);
  return hilbext::projection_field_from_map(space, m, [&](hilbext::VertexId v) {
    const auto& x = space->coordinate(v);
    const Matrix u = expi(x.x() * h1 + x.y() * h2) * expi(h0);
    return Matrix(u * p0 * u.adjoint());
  });
}

inline std::vector<cplx> circle_power(int k, std::size_t n) {
  std::vector<cplx> out;
  for (std::size_t j = 0; j < n; ++j)
    out.push_back(std::polar(1.0, k * 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n)));
  return out;
}

inline hilbext::SpacePtr disk(std::size_t radial, std::size_t angular) {
  return std::make_shared<const hilbext::SimplicialSpace>(hilbext::build_disk_mesh(radial, angular));
}

}  // namespace fixture
