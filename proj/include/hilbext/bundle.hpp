#pragma once

#include <concepts>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "mesh.hpp"
#include "tolerances.hpp"

namespace hilbext {

/// A vector bundle given as the range of a projection-valued field on a simplicial space.
///
/// Every value is an m x m orthogonal projection; the rank is constant on each connected
/// component, and adjacent projections are closer than 1 in operator norm so that adjacent
/// fibres are canonically isomorphic.
class ProjectionField {
public:
  ProjectionField(SpacePtr space, Eigen::Index m, std::vector<Matrix> values, double tol = tol::algebraic)
      : space_(std::move(space)), m_(m), values_(std::move(values)) {
    validate(tol);
  }

  [[nodiscard]] const SpacePtr& space() const noexcept { return space_; }
  [[nodiscard]] Eigen::Index ambient_dim() const noexcept { return m_; }
  [[nodiscard]] const Matrix& value(VertexId v) const { return values_.at(v); }
  [[nodiscard]] const std::vector<Matrix>& values() const noexcept { return values_; }
  [[nodiscard]] std::size_t vertex_count() const noexcept { return values_.size(); }
  [[nodiscard]] int rank_of_component(std::size_t c) const { return component_rank_.at(c); }
  [[nodiscard]] int rank_at(VertexId v) const { return component_rank_.at(space_->component_of().at(v)); }

private:
  void validate(double tol) {
    using Reason = InvalidBundle::Reason;
    if (!space_) throw InvalidBundle(Reason::Shape, "projection field without a space");
    if (m_ < 1) throw InvalidBundle(Reason::Shape, "ambient dimension must be positive");
    if (values_.size() != space_->vertex_count())
      throw InvalidBundle(Reason::Shape, "expected " + std::to_string(space_->vertex_count()) + " values, got " +
                                             std::to_string(values_.size()));
    for (VertexId v = 0; v < values_.size(); ++v) {
      const Matrix& p = values_[v];
      if (p.rows() != m_ || p.cols() != m_)
        throw InvalidBundle(Reason::Shape, "value at vertex " + std::to_string(v) + " is not " +
                                               std::to_string(m_) + "x" + std::to_string(m_));
      if (!p.allFinite()) throw InvalidBundle(Reason::Shape, "non-finite entry at vertex " + std::to_string(v));
      if (linalg::op_norm(p.adjoint() - p) > tol)
        throw InvalidBundle(Reason::NotSelfAdjoint, "P is not self-adjoint at vertex " + std::to_string(v));
      if (linalg::op_norm(p * p - p) > tol)
        throw InvalidBundle(Reason::NotIdempotent, "P is not idempotent at vertex " + std::to_string(v));
    }
    const auto& comp = space_->component_of();
    component_rank_.assign(space_->component_count(), -1);
    for (VertexId v = 0; v < values_.size(); ++v) {
      const int r = linalg::projection_rank(values_[v], tol::rank_threshold);
      int& cr = component_rank_[comp[v]];
      if (cr < 0) cr = r;
      else if (cr != r)
        throw InvalidBundle(Reason::RankJump, "rank changes from " + std::to_string(cr) + " to " +
                                                  std::to_string(r) + " at vertex " + std::to_string(v));
    }
    for (const auto& e : space_->edges()) {
      const double d = linalg::op_norm(values_[e[0]] - values_[e[1]]);
      if (!(d < 1.0))
        throw InvalidBundle(Reason::EdgeDiscontinuity, "||P(u) - P(v)|| = " + std::to_string(d) + " on edge (" +
                                                           std::to_string(e[0]) + "," + std::to_string(e[1]) + ")");
    }
  }

  SpacePtr space_;
  Eigen::Index m_;
  std::vector<Matrix> values_;
  std::vector<int> component_rank_;
};

using BundlePtr = std::shared_ptr<const ProjectionField>;

template <typename Generator>
  requires std::invocable<Generator&, VertexId>
BundlePtr projection_field_from_map(SpacePtr space, Eigen::Index m, Generator&& generator,
                                    double tol = tol::algebraic) {
  if (!space) throw InvalidArgument("projection_field_from_map: null space");
  std::vector<Matrix> values;
  values.reserve(space->vertex_count());
  for (VertexId v = 0; v < space->vertex_count(); ++v) values.emplace_back(generator(v));
  return std::make_shared<const ProjectionField>(std::move(space), m, std::move(values), tol);
}

inline BundlePtr constant_bundle(SpacePtr space, const Matrix& p, double tol = tol::algebraic) {
  return projection_field_from_map(std::move(space), p.rows(), [&](VertexId) { return p; }, tol);
}

/// The free module of rank m: identity projection at every vertex.
inline BundlePtr trivial_bundle(SpacePtr space, Eigen::Index m) {
  return constant_bundle(std::move(space), Matrix::Identity(m, m));
}

inline int bundle_rank(const ProjectionField& p, std::size_t component) {
  if (component >= p.space()->component_count())
    throw InvalidArgument("component " + std::to_string(component) + " does not exist");
  return p.rank_of_component(component);
}

/// Restriction of a field to a subcomplex of its space.
inline BundlePtr restrict_field(const ProjectionField& p, const Subcomplex& sub, double tol = tol::algebraic) {
  return projection_field_from_map(sub.space, p.ambient_dim(),
                                   [&](VertexId v) { return p.value(sub.to_parent.at(v)); }, tol);
}

/// Samples `p` at the nearest vertex (by planar coordinates) of its space for every vertex of
/// `target`. Used to restrict a bounded field on the disk to the levels of an annulus tower.
inline BundlePtr transfer_by_coordinates(const ProjectionField& p, SpacePtr target, double tol = tol::algebraic) {
  const auto& src = *p.space();
  if (!src.has_coordinates() || !target->has_coordinates())
    throw IncompatibleData("coordinate transfer needs planar coordinates on both spaces");
  return projection_field_from_map(
      target, p.ambient_dim(),
      [&](VertexId v) {
        const Point& x = target->coordinate(v);
        VertexId best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (VertexId w = 0; w < src.vertex_count(); ++w) {
          const double d = (src.coordinate(w) - x).squaredNorm();
          if (d < best_d) {
            best_d = d;
            best = w;
          }
        }
        return p.value(best);
      },
      tol);
}

/// Projection field on the corona cycle obtained as the stabilised restriction of a tower family.
struct CoronaProjection {
  SpacePtr cycle;
  std::vector<Matrix> values;
  double epsilon = tol::corona_stabilization;
  /// Deviation between the last two levels; the stabilisation witness (<= epsilon).
  double final_deviation = 0.0;
  /// Deviation between every consecutive pair of levels, outermost pair last.
  std::vector<double> level_deviations;
  BundlePtr field;
};

/// Restricts a per-level family to the corona cycle and accepts it once the last two levels agree
/// within `epsilon`.
inline CoronaProjection corona_limit(std::span<const BundlePtr> fields, const AnnulusTower& tower,
                                     double epsilon = tol::corona_stabilization, double tol = tol::algebraic) {
  if (fields.size() != tower.levels.size())
    throw IncompatibleData("corona_limit: " + std::to_string(fields.size()) + " fields for " +
                           std::to_string(tower.levels.size()) + " tower levels");
  if (fields.size() < 2) throw InvalidArgument("corona_limit needs at least two levels");
  const auto m = fields.front()->ambient_dim();
  for (std::size_t t = 0; t < fields.size(); ++t) {
    if (fields[t]->ambient_dim() != m) throw IncompatibleData("corona_limit: ambient dimensions differ");
    if (fields[t]->vertex_count() != tower.levels[t]->vertex_count())
      throw IncompatibleData("corona_limit: field " + std::to_string(t) + " does not live on its tower level");
  }
  const auto on_cycle = [&](std::size_t t, std::size_t j) -> const Matrix& {
    return fields[t]->value(tower.corona_cycles[t][j]);
  };
  CoronaProjection out;
  out.epsilon = epsilon;
  const auto n = tower.corona_cycles.back().size();
  for (std::size_t t = 0; t + 1 < fields.size(); ++t) {
    double d = 0.0;
    for (std::size_t j = 0; j < n; ++j) d = std::max(d, linalg::op_norm(on_cycle(t, j) - on_cycle(t + 1, j)));
    out.level_deviations.push_back(d);
  }
  out.final_deviation = out.level_deviations.back();
  if (out.final_deviation > epsilon)
    throw NonStabilizing("corona restriction moves by " + std::to_string(out.final_deviation) +
                         " between the last two tower levels (epsilon " + std::to_string(epsilon) + ")");
  out.cycle = corona_space(tower);
  for (std::size_t j = 0; j < n; ++j) out.values.push_back(on_cycle(fields.size() - 1, j));
  out.field = std::make_shared<const ProjectionField>(out.cycle, m, out.values, tol);
  return out;
}

}  // namespace hilbext
