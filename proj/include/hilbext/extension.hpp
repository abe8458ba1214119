#pragma once

#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "invariants/winding.hpp"
#include "isometry.hpp"

namespace hilbext {

/// Boundary samples of a circle map omega together with its declared degree.
struct WindingDatum {
  std::vector<cplx> omega;
  int k = 0;

  /// Validates |omega| = 1, liftability, and that the computed degree equals `declared_k`.
  static WindingDatum make(std::vector<cplx> omega, int declared_k, double tol = tol::algebraic) {
    const int computed = winding_number(omega, tol);
    if (computed != declared_k)
      throw LiftFailure("declared winding " + std::to_string(declared_k) + " but samples wind " +
                        std::to_string(computed) + " times");
    return WindingDatum{std::move(omega), declared_k};
  }
};

/// Hilbert-module extension 0 -> V -> W -> Z -> 0 over a meshed closure X-bar of U.
///
/// V is the module of sections of eta (over X-bar) vanishing on the boundary. Z is Gamma(xi)
/// for a bundle xi over a space Y that the boundary collapses onto via g. W is described by a
/// membership predicate: w in Gamma(eta) belongs to W iff there is z in Gamma(xi) with
/// w(b) = G(b) z(g(b)) at every boundary vertex b, and then Pi(w) = z.
struct ExtensionTriple {
  using Quotient = std::function<std::optional<SectionField>(const SectionField&)>;

  BundlePtr v_bundle;
  BundlePtr z_bundle;
  /// Boundary vertices of X-bar in counter-clockwise cycle order.
  std::vector<VertexId> boundary;
  /// g: boundary[i] -> vertex of Y.
  std::vector<VertexId> boundary_to_z;
  /// G(boundary[i]): fibre of xi at g(b) -> fibre of eta at b, isometric.
  std::vector<Matrix> gluing;
  std::optional<WindingDatum> winding;
  double agreement_tol = tol::algebraic;
  /// Phi: V -> W, the inclusion of ideal sections.
  ModuleMorphism inclusion;
  /// Pi: W -> Z; nullopt for sections outside W.
  Quotient quotient;

  [[nodiscard]] const SpacePtr& space() const { return v_bundle->space(); }
};

/// Boundary vertices of a space that form a single cycle, ordered counter-clockwise when
/// coordinates are available.
inline std::vector<VertexId> boundary_cycle(const SimplicialSpace& space) {
  const auto sub = boundary_subcomplex(space);
  if (sub.to_parent.empty()) throw InvalidMesh("space has no boundary");
  const auto order = cycle_order(*sub.space);
  std::vector<VertexId> out;
  for (auto v : order) out.push_back(sub.to_parent[v]);
  if (space.has_coordinates()) {
    double area = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto& p = space.coordinate(out[i]);
      const auto& q = space.coordinate(out[(i + 1) % out.size()]);
      area += p.x() * q.y() - q.x() * p.y();
    }
    if (area < 0) std::reverse(out.begin() + 1, out.end());
  }
  return out;
}

/// Canonical Pi: solves w(b) = G(b) z(g(b)) for z, or returns nullopt when w is not in W.
inline std::optional<SectionField> solve_quotient(const ExtensionTriple& ext, const SectionField& w) {
  if (!same_bundle(*w.bundle(), *ext.v_bundle)) throw BundleMismatch("section is not over the V bundle");
  const auto& xi = *ext.z_bundle;
  std::vector<Vector> z(xi.vertex_count(), Vector::Zero(xi.ambient_dim()));
  std::vector<int> hits(xi.vertex_count(), 0);
  for (std::size_t i = 0; i < ext.boundary.size(); ++i) {
    z[ext.boundary_to_z[i]] += ext.gluing[i].adjoint() * w.at(ext.boundary[i]);
    ++hits[ext.boundary_to_z[i]];
  }
  for (VertexId y = 0; y < z.size(); ++y) z[y] /= static_cast<double>(hits[y]);
  for (std::size_t i = 0; i < ext.boundary.size(); ++i)
    if ((ext.gluing[i] * z[ext.boundary_to_z[i]] - w.at(ext.boundary[i])).norm() > ext.agreement_tol)
      return std::nullopt;
  return SectionField(ext.z_bundle, std::move(z), ext.agreement_tol);
}

inline bool is_member(const ExtensionTriple& ext, const SectionField& w) { return solve_quotient(ext, w).has_value(); }

/// Assembles and validates an extension from gluing data.
inline ExtensionTriple make_extension(BundlePtr v_bundle, BundlePtr z_bundle, std::vector<VertexId> boundary,
                                      std::vector<VertexId> boundary_to_z, std::vector<Matrix> gluing,
                                      double agreement_tol = tol::algebraic) {
  const auto& space = *v_bundle->space();
  if (boundary.empty()) throw IncompatibleData("extension needs a nonempty boundary");
  if (boundary_to_z.size() != boundary.size() || gluing.size() != boundary.size())
    throw IncompatibleData("gluing data does not cover the boundary");
  std::vector<bool> reached(z_bundle->vertex_count(), false);
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const auto b = boundary[i];
    if (b >= space.vertex_count() || !space.is_boundary(b))
      throw IncompatibleData("vertex " + std::to_string(b) + " is not a boundary vertex");
    const auto y = boundary_to_z[i];
    if (y >= z_bundle->vertex_count()) throw IncompatibleData("boundary map leaves the Z space");
    reached[y] = true;
    const Matrix& g = gluing[i];
    if (g.rows() != v_bundle->ambient_dim() || g.cols() != z_bundle->ambient_dim())
      throw IncompatibleData("gluing matrix at boundary vertex " + std::to_string(b) + " has the wrong shape");
    if (linalg::op_norm(g.adjoint() * g - z_bundle->value(y)) > agreement_tol ||
        linalg::op_norm(v_bundle->value(b) * g - g) > agreement_tol)
      throw InvalidIsometry("gluing at boundary vertex " + std::to_string(b) + " is not a fibrewise isometry");
  }
  for (VertexId y = 0; y < reached.size(); ++y)
    if (!reached[y]) throw IncompatibleData("boundary map misses vertex " + std::to_string(y) + " of Z");

  ExtensionTriple ext;
  ext.v_bundle = std::move(v_bundle);
  ext.z_bundle = std::move(z_bundle);
  ext.boundary = std::move(boundary);
  ext.boundary_to_z = std::move(boundary_to_z);
  ext.gluing = std::move(gluing);
  ext.agreement_tol = agreement_tol;
  ext.inclusion = identity_morphism(ext.v_bundle);
  // the quotient only needs the gluing data, so capture a copy rather than the triple itself
  auto data = std::make_shared<const ExtensionTriple>(ext);
  ext.quotient = [data](const SectionField& w) { return solve_quotient(*data, w); };
  return ext;
}

/// W_k = { alpha in C(closed disk) : alpha|_boundary = lambda * omega }, omega of degree k,
/// over the one-point compactification C_0(U) -> C(S^2) -> C.
inline ExtensionTriple build_Wk_extension(int k, SpacePtr disk) {
  const auto boundary = boundary_cycle(*disk);
  if (!disk->has_coordinates()) throw IncompatibleData("W_k needs planar coordinates on the disk");
  std::vector<cplx> omega;
  for (std::size_t i = 0; i < boundary.size(); ++i) {
    const auto& p = disk->coordinate(boundary[i]);
    const auto& q = disk->coordinate(boundary[(i + 1) % boundary.size()]);
    const double gap = std::arg(cplx(q.x(), q.y()) * std::conj(cplx(p.x(), p.y())));
    if (std::abs(k * gap) >= std::numbers::pi - kLiftMargin)
      throw LiftFailure("boundary cycle of " + std::to_string(boundary.size()) +
                        " vertices is too coarse for winding " + std::to_string(k));
    omega.push_back(std::polar(1.0, k * std::atan2(p.y(), p.x())));
  }
  auto datum = WindingDatum::make(omega, k);

  auto eta = trivial_bundle(disk, 1);
  auto xi = trivial_bundle(point_space(), 1);
  std::vector<Matrix> gluing;
  for (auto w : datum.omega) gluing.push_back(Matrix::Constant(1, 1, w));
  auto ext = make_extension(eta, xi, boundary, std::vector<VertexId>(boundary.size(), 0), std::move(gluing));
  ext.winding = std::move(datum);
  return ext;
}

/// W = C(X-bar) with Z = C(boundary) and Pi the restriction: the split extension with Busby field 1.
inline ExtensionTriple build_split_extension(SpacePtr disk) {
  const auto boundary = boundary_cycle(*disk);
  const auto sub = boundary_subcomplex(*disk);
  std::vector<VertexId> to_child(disk->vertex_count(), 0);
  for (VertexId i = 0; i < sub.to_parent.size(); ++i) to_child[sub.to_parent[i]] = i;
  std::vector<VertexId> g;
  for (auto b : boundary) g.push_back(to_child[b]);
  auto eta = trivial_bundle(disk, 1);
  auto xi = trivial_bundle(sub.space, 1);
  return make_extension(eta, xi, boundary, std::move(g),
                        std::vector<Matrix>(boundary.size(), Matrix::Identity(1, 1)));
}

/// Reads a scalar function as a section of a trivial line bundle.
inline SectionField as_line_section(const BundlePtr& line, const FunctionField& f) {
  if (line->ambient_dim() != 1) throw BundleMismatch("as_line_section: bundle is not a line bundle");
  std::vector<Vector> vals;
  for (auto c : f.values) vals.emplace_back(Vector::Constant(1, c));
  return SectionField(line, std::move(vals));
}

/// (alpha in W_k, lambda) for a scalar function on the disk.
inline std::pair<bool, std::optional<cplx>> membership_Wk(const ExtensionTriple& ext, const FunctionField& alpha) {
  if (ext.z_bundle->vertex_count() != 1 || ext.z_bundle->ambient_dim() != 1 || ext.v_bundle->ambient_dim() != 1)
    throw IncompatibleData("membership_Wk expects rank-one data over a one-point boundary");
  const auto z = solve_quotient(ext, as_line_section(ext.v_bundle, alpha));
  if (!z) return {false, std::nullopt};
  return {true, z->at(0)(0)};
}

/// Function equal to 0 on the boundary and 1 - |x| (or 1) inside; multiplies into the ideal.
inline FunctionField interior_bump(const SimplicialSpace& space, SpacePtr ptr) {
  FunctionField f{std::move(ptr), {}};
  for (VertexId v = 0; v < space.vertex_count(); ++v) {
    if (space.is_boundary(v)) f.values.emplace_back(0.0);
    else if (space.has_coordinates()) f.values.emplace_back(std::max(1e-3, 1.0 - space.coordinate(v).norm()));
    else f.values.emplace_back(1.0);
  }
  return f;
}

inline FunctionField interior_bump(const ExtensionTriple& ext) { return interior_bump(*ext.space(), ext.space()); }

/// A W-section with Pi(w) = z: boundary values G z, interior values extended radially from the
/// angularly nearest boundary vertex and damped towards the centre.
inline SectionField canonical_lift(const ExtensionTriple& ext, const SectionField& z) {
  if (!same_bundle(*z.bundle(), *ext.z_bundle)) throw BundleMismatch("canonical_lift: section is not over Z");
  const auto& space = *ext.space();
  const auto& eta = *ext.v_bundle;
  std::vector<Vector> vals(space.vertex_count(), Vector::Zero(eta.ambient_dim()));
  std::vector<Vector> at_boundary;
  for (std::size_t i = 0; i < ext.boundary.size(); ++i) {
    at_boundary.push_back(ext.gluing[i] * z.at(ext.boundary_to_z[i]));
    vals[ext.boundary[i]] = at_boundary.back();
  }
  if (space.has_coordinates()) {
    for (VertexId v = 0; v < space.vertex_count(); ++v) {
      if (space.is_boundary(v)) continue;
      const Point& x = space.coordinate(v);
      const double rho = std::min(1.0, x.norm());
      if (rho == 0.0) continue;
      std::size_t best = 0;
      double best_dot = -2.0;
      for (std::size_t i = 0; i < ext.boundary.size(); ++i) {
        const Point& b = space.coordinate(ext.boundary[i]);
        const double d = x.dot(b) / (b.norm() * x.norm());
        if (d > best_dot) {
          best_dot = d;
          best = i;
        }
      }
      vals[v] = rho * (eta.value(v) * at_boundary[best]);
    }
  }
  return SectionField(ext.v_bundle, std::move(vals));
}

/// Random elements of W: canonical lifts of random Z-sections plus random ideal sections.
/// Every third sample has Pi = 0.
inline std::vector<SectionField> sample_w_sections(const ExtensionTriple& ext, std::size_t count,
                                                   std::mt19937_64& rng) {
  const auto bump = interior_bump(ext);
  std::vector<SectionField> out;
  for (std::size_t i = 0; i < count; ++i) {
    auto ideal = act(random_section(ext.v_bundle, rng), bump);
    if (i % 3 == 2) {
      out.push_back(std::move(ideal));
      continue;
    }
    out.push_back(add(canonical_lift(ext, random_section(ext.z_bundle, rng)), ideal));
  }
  return out;
}

/// A W-sample whose inner products have no common zero when the extension is full.
inline std::vector<SectionField> spanning_w_sample(const ExtensionTriple& ext) {
  std::vector<SectionField> out;
  for (const auto& p : standard_probes(ext.z_bundle)) out.push_back(canonical_lift(ext, p));
  const auto bump = interior_bump(ext);
  for (const auto& p : standard_probes(ext.v_bundle)) out.push_back(act(p, bump));
  return out;
}

struct ExactnessCheck {
  bool ok = true;
  std::size_t sample = 0;
  std::string what;

  explicit operator bool() const noexcept { return ok; }
};

/// Im Phi = ker Pi on the samples: Pi(w) = 0 exactly for the ideal samples, and Phi maps the
/// ideal part of every sample into W with zero quotient.
inline ExactnessCheck check_exactness_report(const ExtensionTriple& ext, std::span<const SectionField> samples,
                                             double tol = tol::algebraic) {
  const auto bump = interior_bump(ext);
  const auto vanishes = [&](const SectionField& z) {
    return std::all_of(z.values().begin(), z.values().end(), [&](const Vector& x) { return x.squaredNorm() <= tol; });
  };
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& w = samples[i];
    if (!is_member(ext, w)) return {false, i, "sample is not in W"};
    const auto pi = ext.quotient(w);
    if (!pi) return {false, i, "quotient map rejects a member of W"};
    const bool killed = vanishes(*pi);
    const bool ideal = is_ideal_section(w, tol);
    if (killed != ideal)
      return {false, i, ideal ? "ideal section has nonzero quotient" : "non-ideal section has zero quotient"};

    const auto v = act(w, bump);
    const auto image = apply_morphism(ext.inclusion, v, tol);
    if (!is_member(ext, image)) return {false, i, "Phi(v) is not in W"};
    const auto pv = ext.quotient(image);
    if (!pv || !vanishes(*pv)) return {false, i, "Pi o Phi is not zero"};
  }
  return {};
}

inline bool check_exactness(const ExtensionTriple& ext, std::span<const SectionField> samples,
                            double tol = tol::algebraic) {
  return check_exactness_report(ext, samples, tol).ok;
}

/// <Pi w, Pi w'>(g(b)) = <w, w'>(b) on the boundary: Pi is a morphism over the restriction map.
inline bool check_quotient_morphism(const ExtensionTriple& ext, std::span<const SectionField> samples,
                                    double tol = tol::algebraic) {
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i; j < samples.size(); ++j) {
      const auto zi = ext.quotient(samples[i]);
      const auto zj = ext.quotient(samples[j]);
      if (!zi || !zj) return false;
      const auto lhs = inner_product(*zi, *zj);
      const auto rhs = inner_product(samples[i], samples[j]);
      for (std::size_t k = 0; k < ext.boundary.size(); ++k)
        if (std::abs(lhs[ext.boundary_to_z[k]] - rhs[ext.boundary[k]]) > tol) return false;
    }
  return true;
}

/// Fullness of W over its algebra: the sample inner products have no common zero and each of
/// them is constant on every fibre of g (so they lie in C(X) inside C(X-bar)).
inline bool check_fullness(const ExtensionTriple& ext, std::span<const SectionField> samples,
                           double tol = tol::algebraic) {
  if (!is_full(samples, tol)) return false;
  for (std::size_t i = 0; i < samples.size(); ++i)
    for (std::size_t j = i; j < samples.size(); ++j) {
      const auto ip = inner_product(samples[i], samples[j]);
      std::vector<std::optional<cplx>> on_z(ext.z_bundle->vertex_count());
      for (std::size_t k = 0; k < ext.boundary.size(); ++k) {
        auto& slot = on_z[ext.boundary_to_z[k]];
        const cplx val = ip[ext.boundary[k]];
        if (!slot) slot = val;
        else if (std::abs(*slot - val) > tol) return false;
      }
    }
  return true;
}

namespace detail {

/// For every corona vertex, the boundary index of X-bar sitting at the same point.
inline std::vector<std::size_t> corona_to_boundary(const ExtensionTriple& ext, const SimplicialSpace& corona) {
  const auto& space = *ext.space();
  if (!space.has_coordinates() || !corona.has_coordinates())
    throw IncompatibleData("matching the corona to the boundary needs coordinates");
  std::vector<std::size_t> out;
  for (VertexId c = 0; c < corona.vertex_count(); ++c) {
    std::size_t hit = ext.boundary.size();
    for (std::size_t i = 0; i < ext.boundary.size(); ++i)
      if ((space.coordinate(ext.boundary[i]) - corona.coordinate(c)).norm() < 1e-9) {
        hit = i;
        break;
      }
    if (hit == ext.boundary.size())
      throw IncompatibleData("corona vertex " + std::to_string(c) + " has no matching boundary vertex");
    out.push_back(hit);
  }
  return out;
}

inline std::vector<BundlePtr> tower_fields(const ExtensionTriple& ext, const AnnulusTower& tower) {
  std::vector<BundlePtr> out;
  for (const auto& level : tower.levels) out.push_back(transfer_by_coordinates(*ext.v_bundle, level));
  return out;
}

inline IsometryField busby_on(const ExtensionTriple& ext, const SimplicialSpace& corona, BundlePtr zeta) {
  const auto match = corona_to_boundary(ext, corona);
  std::vector<VertexId> f;
  std::vector<Matrix> d;
  for (auto i : match) {
    f.push_back(ext.boundary_to_z[i]);
    d.push_back(ext.gluing[i]);
  }
  return IsometryField(ext.z_bundle, std::move(f), std::move(zeta), std::move(d), ext.agreement_tol);
}

}  // namespace detail

/// Busby invariant read at a single tower level: the image of Z in the corona restriction of
/// eta on that level, as an isometry field over the corona cycle.
inline IsometryField busby_invariant_at_level(const ExtensionTriple& ext, const AnnulusTower& tower,
                                              std::size_t level) {
  const auto corona = corona_space(tower);
  const auto field = transfer_by_coordinates(*ext.v_bundle, tower.levels.at(level));
  const auto& cycle = tower.corona_cycles.at(level);
  auto zeta = projection_field_from_map(corona, field->ambient_dim(),
                                        [&](VertexId c) { return field->value(cycle[c]); });
  return detail::busby_on(ext, *corona, std::move(zeta));
}

/// Busby invariant Delta: Z -> Q(V) as a fibrewise isometry into the stabilised corona bundle.
inline IsometryField busby_invariant(const ExtensionTriple& ext, const AnnulusTower& tower,
                                     double epsilon = tol::corona_stabilization) {
  const auto fields = detail::tower_fields(ext, tower);
  const auto limit = corona_limit(fields, tower, epsilon);
  return detail::busby_on(ext, *limit.cycle, limit.field);
}

/// The pullback extension W = {(m, z) : m|corona = Delta(z)} realised on the disk carrying
/// `v_bundle`: boundary values of W-sections are glued to Z through the Busby field.
inline ExtensionTriple extension_from_busby(const IsometryField& delta, BundlePtr v_bundle, BundlePtr z_bundle,
                                            const AnnulusTower& tower, double agreement_tol = tol::corona_agreement) {
  if (delta.source()->ambient_dim() != z_bundle->ambient_dim() ||
      delta.source()->vertex_count() != z_bundle->vertex_count())
    throw IncompatibleData("Busby field source does not match the Z bundle");
  if (delta.target()->ambient_dim() != v_bundle->ambient_dim())
    throw IncompatibleData("Busby field target does not match the V bundle");
  const auto corona = corona_space(tower);
  if (delta.vertex_count() != corona->vertex_count())
    throw IncompatibleData("Busby field does not live on the tower's corona cycle");

  const auto boundary = boundary_cycle(*v_bundle->space());
  const auto& space = *v_bundle->space();
  std::vector<VertexId> g;
  std::vector<Matrix> gluing;
  for (auto b : boundary) {
    VertexId hit = corona->vertex_count();
    for (VertexId c = 0; c < corona->vertex_count(); ++c)
      if ((corona->coordinate(c) - space.coordinate(b)).norm() < 1e-9) {
        hit = c;
        break;
      }
    if (hit == corona->vertex_count())
      throw IncompatibleData("boundary vertex " + std::to_string(b) + " has no matching corona vertex");
    g.push_back(delta.vertex_map()[hit]);
    gluing.push_back(delta.value(hit));
  }
  return make_extension(std::move(v_bundle), std::move(z_bundle), boundary, std::move(g), std::move(gluing),
                        agreement_tol);
}

}  // namespace hilbext
