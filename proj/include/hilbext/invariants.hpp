#pragma once

#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "extension.hpp"
#include "invariants/fredholm.hpp"
#include "invariants/winding.hpp"
#include "isometry.hpp"

namespace hilbext {

/// Homotopy invariant of an extension: integer windings over a cycle basis, or the infinite class.
struct InvariantRecord {
  enum class Kind { Finite, Infinite };
  Kind kind = Kind::Finite;
  std::vector<int> windings;

  static InvariantRecord finite(std::vector<int> w) { return {Kind::Finite, std::move(w)}; }
  static InvariantRecord infinite() { return {Kind::Infinite, {}}; }
  static InvariantRecord from(const ExtensionClass& c) {
    return c.is_finite() ? finite({c.index}) : infinite();
  }

  friend bool operator==(const InvariantRecord&, const InvariantRecord&) = default;
};

namespace detail {

/// Orthonormal frames of the projections along a closed vertex path, parallel transported by
/// polar projection and then corrected by a uniformly spread holonomy so that they close up.
inline std::vector<Matrix> closed_transported_frames(const std::vector<const Matrix*>& projections) {
  const auto n = projections.size();
  std::vector<Matrix> frames;
  frames.push_back(linalg::fiber_basis(*projections[0]));
  if (frames[0].cols() == 0) return std::vector<Matrix>(n, frames[0]);
  for (std::size_t j = 1; j < n; ++j) frames.push_back(linalg::polar_factor(*projections[j] * frames[j - 1]));
  const Matrix back = linalg::polar_factor(*projections[0] * frames[n - 1]);
  const Matrix log_holonomy = linalg::unitary_log(frames[0].adjoint() * back);
  for (std::size_t j = 1; j < n; ++j)
    frames[j] = frames[j] * linalg::skew_exp(-(static_cast<double>(j) / static_cast<double>(n)) * log_holonomy);
  return frames;
}

inline int det_winding_along(const IsometryField& d, const std::vector<VertexId>& cycle) {
  std::vector<const Matrix*> target_path;
  std::vector<const Matrix*> source_path;
  for (auto z : cycle) {
    if (d.source_rank(z) != d.target_rank(z))
      throw IncompatibleData("det_winding needs equal source and target ranks (vertex " + std::to_string(z) + ")");
    target_path.push_back(&d.target()->value(z));
    source_path.push_back(&d.source()->value(d.vertex_map()[z]));
  }
  const auto ft = closed_transported_frames(target_path);
  const auto fs = closed_transported_frames(source_path);
  std::vector<cplx> dets;
  for (std::size_t j = 0; j < cycle.size(); ++j) {
    const Matrix block = ft[j].adjoint() * d.value(cycle[j]) * fs[j];
    const cplx det = block.size() == 0 ? cplx(1.0) : block.determinant();
    if (std::abs(det) < 0.5) throw InvalidIsometry("fibre determinant is far from unimodular");
    dets.push_back(det / std::abs(det));
  }
  return winding_number(dets);
}

}  // namespace detail

/// Winding of z |-> det D(z) over a base that is a single cycle, with D written in closed
/// transported frames of the source and target bundles.
inline int det_winding(const IsometryField& d) { return detail::det_winding_along(d, cycle_order(*d.base())); }

/// Homotopy invariant of an isometry field over a graph: det-windings over the fundamental
/// cycles where source and target ranks agree, 0 where the source rank is smaller (the Stiefel
/// manifold is then simply connected).
inline InvariantRecord stiefel_class(const IsometryField& d) {
  const auto& base = *d.base();
  if (!base.triangles().empty()) throw InvalidArgument("stiefel_class needs a 1-dimensional base");
  std::vector<int> windings;
  for (const auto& cycle : fundamental_cycles(base)) {
    const bool square = d.source_rank(cycle.front()) == d.target_rank(cycle.front());
    windings.push_back(square ? detail::det_winding_along(d, cycle) : 0);
  }
  return InvariantRecord::finite(std::move(windings));
}

struct StabilizationReport {
  std::vector<InvariantRecord> per_level;
  bool stable = true;
};

inline StabilizationReport stabilization_report(std::span<const IsometryField> levels) {
  StabilizationReport out;
  for (const auto& d : levels) out.per_level.push_back(stiefel_class(d));
  for (std::size_t t = 1; t < out.per_level.size(); ++t)
    if (!(out.per_level[t] == out.per_level[0])) out.stable = false;
  return out;
}

inline std::string describe(const InvariantRecord& r) {
  if (r.kind == InvariantRecord::Kind::Infinite) return "infinite";
  std::string s = "[";
  for (std::size_t i = 0; i < r.windings.size(); ++i) s += (i ? "," : "") + std::to_string(r.windings[i]);
  return s + "]";
}

/// Direct-limit surrogate: the common Stiefel class of Busby fields read at every tower level.
inline InvariantRecord stabilized_invariant(std::span<const IsometryField> levels) {
  if (levels.empty()) throw InvalidArgument("stabilized_invariant: no levels");
  const auto rep = stabilization_report(levels);
  if (!rep.stable) {
    std::string msg = "tower levels disagree:";
    for (std::size_t t = 0; t < rep.per_level.size(); ++t)
      msg += " level " + std::to_string(t) + " " + describe(rep.per_level[t]);
    throw Unstable(msg);
  }
  return rep.per_level.front();
}

inline std::vector<IsometryField> busby_levels(const ExtensionTriple& ext, const AnnulusTower& tower) {
  std::vector<IsometryField> out;
  for (std::size_t t = 0; t < tower.levels.size(); ++t) out.push_back(busby_invariant_at_level(ext, tower, t));
  return out;
}

inline InvariantRecord stabilized_invariant(const ExtensionTriple& ext, const AnnulusTower& tower) {
  const auto levels = busby_levels(ext, tower);
  return stabilized_invariant(levels);
}

/// Verdict of a homotopy test; when equivalent, a discrete path of isometry fields from a to b.
struct HomotopyVerdict {
  bool equivalent = false;
  std::vector<IsometryField> certificate;
};

namespace detail {

inline void require_same_shape(const IsometryField& a, const IsometryField& b) {
  const auto& ba = *a.base();
  const auto& bb = *b.base();
  if (!(ba.vertex_count() == bb.vertex_count() && ba.edges() == bb.edges()))
    throw ShapeMismatch("isometry fields live over different bases");
  if (a.vertex_map() != b.vertex_map()) throw ShapeMismatch("isometry fields use different vertex maps");
  if (!same_bundle(*a.source(), *b.source()) || !same_bundle(*a.target(), *b.target()))
    throw ShapeMismatch("isometry fields connect different bundles");
}

inline double field_distance(const IsometryField& a, const IsometryField& b) {
  double out = 0.0;
  for (VertexId z = 0; z < a.vertex_count(); ++z) out = std::max(out, linalg::op_norm(a.value(z) - b.value(z)));
  return out;
}

/// Geodesic path: D_s(z) = E(z) r(z)^s E(z)^* A(z), with r(z) the fibre unitary carrying A(z)
/// to B(z). For square fibres the determinant phase of r is lifted continuously over the base
/// first so that r^s stays continuous in z when the det-windings agree.
inline std::vector<IsometryField> geodesic_path(const IsometryField& a, const IsometryField& b) {
  const auto& base = *a.base();
  const auto n = a.vertex_count();
  std::vector<Matrix> frame(n);
  std::vector<Matrix> rel(n);
  std::vector<cplx> dets(n, 1.0);
  std::vector<bool> square(n, false);
  for (VertexId z = 0; z < n; ++z) {
    frame[z] = linalg::fiber_basis(a.target()->value(z));
    const Matrix src = linalg::fiber_basis(a.source()->value(a.vertex_map()[z]));
    const Matrix alpha = frame[z].adjoint() * a.value(z) * src;
    const Matrix beta = frame[z].adjoint() * b.value(z) * src;
    const auto m = alpha.rows();
    if (m == 0) {
      rel[z] = Matrix(0, 0);
      continue;
    }
    square[z] = alpha.cols() == m;
    if (square[z]) {
      rel[z] = beta * alpha.adjoint();
    } else {
      Matrix ua(m, m);
      Matrix ub(m, m);
      ua << alpha, linalg::orthonormal_complement(alpha);
      ub << beta, linalg::orthonormal_complement(beta);
      const cplx det = (ub * ua.adjoint()).determinant();
      ub.col(m - 1) *= std::conj(det) / std::abs(det);
      rel[z] = ub * ua.adjoint();
    }
    dets[z] = rel[z].determinant();
    dets[z] /= std::abs(dets[z]);
  }

  // continuous lift of arg det r over a BFS forest
  std::vector<double> theta(n, 0.0);
  std::vector<bool> seen(n, false);
  for (VertexId root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    theta[root] = square[root] ? std::arg(dets[root]) : 0.0;
    std::queue<VertexId> q;
    q.push(root);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto w : base.neighbors(v))
        if (!seen[w]) {
          seen[w] = true;
          theta[w] = square[w] ? theta[v] + linalg::arg_increment(dets[v], dets[w]) : 0.0;
          q.push(w);
        }
    }
  }

  std::vector<Matrix> logs(n);
  double reach = 0.0;
  for (VertexId z = 0; z < n; ++z) {
    const auto m = rel[z].rows();
    if (m == 0) continue;
    const double phase = square[z] ? theta[z] / static_cast<double>(m) : 0.0;
    logs[z] = linalg::unitary_log(std::polar(1.0, -phase) * rel[z]);
    reach = std::max(reach, linalg::op_norm(logs[z]) + std::abs(phase));
  }
  const int steps = std::max(1, static_cast<int>(std::ceil(reach / 0.4)));

  std::vector<IsometryField> path{a};
  for (int i = 1; i < steps; ++i) {
    const double s = static_cast<double>(i) / steps;
    std::vector<Matrix> vals;
    for (VertexId z = 0; z < n; ++z) {
      const auto m = rel[z].rows();
      if (m == 0) {
        vals.push_back(a.value(z));
        continue;
      }
      const double phase = square[z] ? theta[z] / static_cast<double>(m) : 0.0;
      const Matrix rs = std::polar(1.0, s * phase) * linalg::skew_exp(s * logs[z]);
      vals.push_back(frame[z] * rs * frame[z].adjoint() * a.value(z));
    }
    path.emplace_back(a.source(), a.vertex_map(), a.target(), std::move(vals), 1e-6);
  }
  path.push_back(b);
  return path;
}

}  // namespace detail

/// Every step is a valid isometry field (checked on construction at 1e-6), the path joins a
/// to b, and consecutive steps are closer than 0.5.
inline bool validate_certificate(std::span<const IsometryField> path, const IsometryField& a, const IsometryField& b) {
  if (path.size() < 2) return false;
  if (detail::field_distance(path.front(), a) > tol::algebraic || detail::field_distance(path.back(), b) > tol::algebraic)
    return false;
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    if (!(detail::field_distance(path[i], path[i + 1]) < 0.5)) return false;
  for (const auto& step : path)
    if (find_isometry_violation(*step.source(), step.vertex_map(), *step.target(), step.values(), 1e-6)) return false;
  return true;
}

/// Homotopy equivalence of Busby fields over a graph; emits a certificate path when equivalent.
inline HomotopyVerdict homotopy_equivalent(const IsometryField& a, const IsometryField& b) {
  detail::require_same_shape(a, b);
  HomotopyVerdict out;
  out.equivalent = stiefel_class(a) == stiefel_class(b);
  if (out.equivalent) out.certificate = detail::geodesic_path(a, b);
  return out;
}

}  // namespace hilbext
