#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hilbmod.hpp"

namespace hilbext {

struct IsometryViolation {
  VertexId vertex = 0;
  double residual = 0.0;
  std::string what;
};

/// First vertex at which `values` fails to be a fibrewise isometry f*(source) -> target.
inline std::optional<IsometryViolation> find_isometry_violation(const ProjectionField& source,
                                                                std::span<const VertexId> vertex_map,
                                                                const ProjectionField& target,
                                                                std::span<const Matrix> values,
                                                                double tol = tol::algebraic) {
  const auto n = target.vertex_count();
  if (vertex_map.size() != n || values.size() != n)
    return IsometryViolation{0, 0.0, "isometry data does not cover every base vertex"};
  for (VertexId z = 0; z < n; ++z) {
    const VertexId y = vertex_map[z];
    if (y >= source.vertex_count()) return IsometryViolation{z, 0.0, "vertex map leaves the source space"};
    const Matrix& d = values[z];
    if (d.rows() != target.ambient_dim() || d.cols() != source.ambient_dim())
      return IsometryViolation{z, 0.0, "matrix has the wrong shape"};
    const Matrix& ps = source.value(y);
    const Matrix& pt = target.value(z);
    if (const double r = linalg::op_norm(d * ps - d); r > tol)
      return IsometryViolation{z, r, "does not vanish off the source fibre"};
    if (const double r = linalg::op_norm(pt * d - d); r > tol)
      return IsometryViolation{z, r, "leaves the target fibre"};
    if (const double r = linalg::op_norm(d.adjoint() * d - ps); r > tol)
      return IsometryViolation{z, r, "D*D differs from the source projection"};
  }
  return std::nullopt;
}

/// Fibrewise isometry D: f*(xi) -> zeta over the base of zeta, i.e. a Busby invariant in the
/// commutative projective setting. Values are m_zeta x m_xi matrices with D(z)* D(z) = P_xi(f(z)).
class IsometryField {
public:
  IsometryField(BundlePtr source, std::vector<VertexId> vertex_map, BundlePtr target, std::vector<Matrix> values,
                double tol = tol::algebraic)
      : source_(std::move(source)), map_(std::move(vertex_map)), target_(std::move(target)), values_(std::move(values)) {
    if (!source_ || !target_) throw InvalidIsometry("isometry field without source or target bundle");
    if (auto bad = find_isometry_violation(*source_, map_, *target_, values_, tol))
      throw InvalidIsometry("vertex " + std::to_string(bad->vertex) + ": " + bad->what +
                            (bad->residual > 0 ? " (residual " + std::to_string(bad->residual) + ")" : ""));
  }

  [[nodiscard]] const SpacePtr& base() const noexcept { return target_->space(); }
  [[nodiscard]] const BundlePtr& source() const noexcept { return source_; }
  [[nodiscard]] const BundlePtr& target() const noexcept { return target_; }
  [[nodiscard]] const std::vector<VertexId>& vertex_map() const noexcept { return map_; }
  [[nodiscard]] const Matrix& value(VertexId z) const { return values_.at(z); }
  [[nodiscard]] const std::vector<Matrix>& values() const noexcept { return values_; }
  [[nodiscard]] std::size_t vertex_count() const noexcept { return values_.size(); }
  /// Rank of the source fibre at f(z).
  [[nodiscard]] int source_rank(VertexId z) const { return source_->rank_at(map_.at(z)); }
  [[nodiscard]] int target_rank(VertexId z) const { return target_->rank_at(z); }

private:
  BundlePtr source_;
  std::vector<VertexId> map_;
  BundlePtr target_;
  std::vector<Matrix> values_;
};

/// f*(xi) over `base`: the fibre at z is the stored fibre of xi at f(z).
/// Every edge of `base` must map to an edge of xi's space or collapse to a vertex.
inline BundlePtr pullback_bundle(const ProjectionField& xi, SpacePtr base, std::span<const VertexId> f,
                                 double tol = tol::algebraic) {
  if (f.size() != base->vertex_count()) throw IncompatibleData("pullback: vertex map does not cover the base");
  const auto& y = *xi.space();
  for (auto fy : f)
    if (fy >= y.vertex_count()) throw IncompatibleData("pullback: vertex map leaves the source space");
  for (const auto& e : base->edges()) {
    const auto a = f[e[0]];
    const auto b = f[e[1]];
    if (a != b && !y.has_edge(a, b))
      throw IncompatibleData("pullback: edge (" + std::to_string(e[0]) + "," + std::to_string(e[1]) +
                             ") maps to non-adjacent vertices");
  }
  return projection_field_from_map(std::move(base), xi.ambient_dim(), [&](VertexId z) { return xi.value(f[z]); }, tol);
}

/// Delta_D(s) = D o s o f.
inline ModuleMorphism isometry_to_delta(const IsometryField& d) {
  return ModuleMorphism{d.source(), d.target(), d.vertex_map(), d.values()};
}

/// Sections y |-> P(y) e_j for the standard basis e_j; they span every fibre.
inline std::vector<SectionField> standard_probes(const BundlePtr& xi) {
  std::vector<SectionField> out;
  for (Eigen::Index j = 0; j < xi->ambient_dim(); ++j)
    out.push_back(projected_constant_section(xi, Vector::Unit(xi->ambient_dim(), j)));
  return out;
}

/// Recovers D_Delta from the morphism by evaluating it on probe sections only:
/// D(z) s_i(f(z)) = Delta(s_i)(z), solved on the fibre of xi at f(z).
inline IsometryField delta_to_isometry(const ModuleMorphism& delta, std::span<const SectionField> probes,
                                       double tol = tol::algebraic) {
  delta.check_shape();
  if (probes.empty()) throw InvalidArgument("delta_to_isometry: empty probe family");
  for (const auto& p : probes)
    if (!same_bundle(*p.bundle(), *delta.source)) throw BundleMismatch("delta_to_isometry: probe is not over the source");

  std::vector<SectionPair> pairs;
  for (std::size_t i = 0; i < probes.size(); ++i)
    for (std::size_t j = i; j < probes.size(); ++j) pairs.emplace_back(probes[i], probes[j]);
  if (auto chk = check_morphism_report(delta, pairs, tol); !chk)
    throw InvalidIsometry("morphism axiom fails at vertex " + std::to_string(chk.vertex) + ": " + chk.what);

  std::vector<SectionField> images;
  for (const auto& p : probes) images.push_back(apply_morphism(delta, p, tol));

  const auto& xi = *delta.source;
  const auto& zeta = *delta.target;
  const auto np = static_cast<Eigen::Index>(probes.size());
  std::vector<Matrix> values;
  for (VertexId z = 0; z < zeta.vertex_count(); ++z) {
    const VertexId y = delta.vertex_map[z];
    const Matrix e = linalg::fiber_basis(xi.value(y));
    Matrix s(xi.ambient_dim(), np);
    Matrix t(zeta.ambient_dim(), np);
    for (Eigen::Index i = 0; i < np; ++i) {
      s.col(i) = probes[static_cast<std::size_t>(i)].at(y);
      t.col(i) = images[static_cast<std::size_t>(i)].at(z);
    }
    if (e.cols() == 0) {
      values.emplace_back(Matrix::Zero(zeta.ambient_dim(), xi.ambient_dim()));
      continue;
    }
    const Matrix c = e.adjoint() * s;  // probe values in fibre coordinates
    const Matrix gram = c * c.adjoint();
    Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
    if (es.eigenvalues()(0) <= tol)
      throw InvalidArgument("probe family does not span the source fibre over vertex " + std::to_string(y));
    const Matrix de = t * c.adjoint() * gram.inverse();
    values.emplace_back(de * e.adjoint());
  }
  return IsometryField(delta.source, delta.vertex_map, delta.target, std::move(values), tol);
}

inline double max_entry_difference(std::span<const Matrix> a, std::span<const Matrix> b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != b[i].rows() || a[i].cols() != b[i].cols()) return std::numeric_limits<double>::infinity();
    if (a[i].size() > 0) out = std::max(out, (a[i] - b[i]).cwiseAbs().maxCoeff());
  }
  return out;
}

/// Delta -> D_Delta -> Delta_{D_Delta}, compared with Delta on the probe sections.
inline bool roundtrip_check(const ModuleMorphism& delta, std::span<const SectionField> probes,
                            double tol = tol::algebraic) {
  try {
    const auto d = delta_to_isometry(delta, probes, tol);
    const auto back = isometry_to_delta(d);
    if (back.vertex_map != delta.vertex_map) return false;
    for (const auto& p : probes) {
      const auto a = apply_morphism(delta, p, tol);
      const auto b = apply_morphism(back, p, tol);
      for (VertexId z = 0; z < a.vertex_count(); ++z)
        if ((a.at(z) - b.at(z)).cwiseAbs().maxCoeff() > tol) return false;
    }
    return true;
  } catch (const Error&) {
    return false;
  }
}

/// D -> Delta_D -> D_{Delta_D} entrywise, and the opposite composite on Delta_D.
inline bool roundtrip_check(const IsometryField& d, std::span<const SectionField> probes, double tol = tol::algebraic) {
  try {
    const auto delta = isometry_to_delta(d);
    const auto recovered = delta_to_isometry(delta, probes, tol);
    if (recovered.vertex_map() != d.vertex_map()) return false;
    if (max_entry_difference(recovered.values(), d.values()) > tol) return false;
    return roundtrip_check(delta, probes, tol);
  } catch (const Error&) {
    return false;
  }
}

/// Random valid isometry field: D(z) = E_zeta(z) W(z) E_xi(f(z))^* with Haar-random isometries W.
inline IsometryField random_isometry_field(const BundlePtr& source, std::vector<VertexId> vertex_map,
                                           const BundlePtr& target, std::mt19937_64& rng) {
  std::vector<Matrix> values;
  for (VertexId z = 0; z < target->vertex_count(); ++z) {
    const Matrix ex = linalg::fiber_basis(source->value(vertex_map.at(z)));
    const Matrix ez = linalg::fiber_basis(target->value(z));
    if (ex.cols() > ez.cols()) throw IncompatibleData("source rank exceeds target rank");
    values.emplace_back(ez * linalg::random_isometry(ez.cols(), ex.cols(), rng) * ex.adjoint());
  }
  return IsometryField(source, std::move(vertex_map), target, std::move(values));
}

}  // namespace hilbext
