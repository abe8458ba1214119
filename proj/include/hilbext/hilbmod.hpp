#pragma once

#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bundle.hpp"

namespace hilbext {

/// Scalar function on the vertices of a space; an element of C(X), C_0(U) or C(dU).
struct FunctionField {
  SpacePtr space;
  std::vector<cplx> values;

  [[nodiscard]] cplx operator[](VertexId v) const { return values.at(v); }
};

inline FunctionField constant_function(SpacePtr space, cplx c) {
  const auto n = space->vertex_count();
  return FunctionField{std::move(space), std::vector<cplx>(n, c)};
}

/// Continuous section of a projection-field bundle: s(v) lies in Im P(v) at every vertex.
class SectionField {
public:
  SectionField(BundlePtr bundle, std::vector<Vector> values, double tol = tol::algebraic)
      : bundle_(std::move(bundle)), values_(std::move(values)) {
    if (!bundle_) throw InvalidSection("section without a bundle");
    if (values_.size() != bundle_->vertex_count())
      throw InvalidSection("expected " + std::to_string(bundle_->vertex_count()) + " fibre values, got " +
                           std::to_string(values_.size()));
    for (VertexId v = 0; v < values_.size(); ++v) {
      if (values_[v].size() != bundle_->ambient_dim())
        throw InvalidSection("fibre value at vertex " + std::to_string(v) + " has the wrong dimension");
      if ((bundle_->value(v) * values_[v] - values_[v]).norm() > tol)
        throw InvalidSection("value at vertex " + std::to_string(v) + " leaves the fibre");
    }
  }

  [[nodiscard]] const BundlePtr& bundle() const noexcept { return bundle_; }
  [[nodiscard]] const Vector& at(VertexId v) const { return values_.at(v); }
  [[nodiscard]] const std::vector<Vector>& values() const noexcept { return values_; }
  [[nodiscard]] std::size_t vertex_count() const noexcept { return values_.size(); }

private:
  BundlePtr bundle_;
  std::vector<Vector> values_;
};

/// Identical pointer, or same space with identical projection values.
inline bool same_bundle(const ProjectionField& a, const ProjectionField& b) {
  if (&a == &b) return true;
  if (a.ambient_dim() != b.ambient_dim() || a.vertex_count() != b.vertex_count()) return false;
  if (a.space() != b.space() && !(*a.space() == *b.space())) return false;
  for (VertexId v = 0; v < a.vertex_count(); ++v)
    if (a.value(v) != b.value(v)) return false;
  return true;
}

inline SectionField zero_section(BundlePtr bundle) {
  const auto n = bundle->vertex_count();
  const auto m = bundle->ambient_dim();
  return SectionField(std::move(bundle), std::vector<Vector>(n, Vector::Zero(m)));
}

/// Section v |-> P(v) x for a fixed ambient vector x.
inline SectionField projected_constant_section(BundlePtr bundle, const Vector& x) {
  std::vector<Vector> vals;
  for (VertexId v = 0; v < bundle->vertex_count(); ++v) vals.emplace_back(bundle->value(v) * x);
  return SectionField(std::move(bundle), std::move(vals));
}

inline SectionField random_section(BundlePtr bundle, std::mt19937_64& rng) {
  std::vector<Vector> vals;
  for (VertexId v = 0; v < bundle->vertex_count(); ++v)
    vals.emplace_back(bundle->value(v) * linalg::random_gaussian(bundle->ambient_dim(), 1, rng));
  return SectionField(std::move(bundle), std::move(vals));
}

/// Pointwise Hermitian pairing <s, s'>(v) = s(v)^* s'(v).
inline FunctionField inner_product(const SectionField& s, const SectionField& t) {
  if (!same_bundle(*s.bundle(), *t.bundle())) throw BundleMismatch("inner_product: sections live on different bundles");
  FunctionField out{s.bundle()->space(), {}};
  out.values.reserve(s.vertex_count());
  for (VertexId v = 0; v < s.vertex_count(); ++v) out.values.push_back(s.at(v).dot(t.at(v)));
  return out;
}

/// Hilbert-module norm ||<s,s>||^(1/2) = max_v ||s(v)||.
inline double sup_norm(const SectionField& s) {
  double out = 0.0;
  for (const auto& x : s.values()) out = std::max(out, x.norm());
  return out;
}

/// Module action s . g by a scalar function on the same space.
inline SectionField act(const SectionField& s, const FunctionField& g) {
  if (g.values.size() != s.vertex_count()) throw BundleMismatch("act: function and section sizes differ");
  std::vector<Vector> vals;
  for (VertexId v = 0; v < s.vertex_count(); ++v) vals.emplace_back(s.at(v) * g[v]);
  return SectionField(s.bundle(), std::move(vals));
}

inline SectionField add(const SectionField& a, const SectionField& b, cplx scale_b = 1.0) {
  if (!same_bundle(*a.bundle(), *b.bundle())) throw BundleMismatch("add: sections live on different bundles");
  std::vector<Vector> vals;
  for (VertexId v = 0; v < a.vertex_count(); ++v) vals.emplace_back(a.at(v) + scale_b * b.at(v));
  return SectionField(a.bundle(), std::move(vals));
}

/// Membership in the ideal submodule Gamma_0: <s,s> vanishes on every boundary vertex.
inline bool is_ideal_section(const SectionField& s, double tol = tol::algebraic) {
  const auto& space = *s.bundle()->space();
  for (VertexId v = 0; v < s.vertex_count(); ++v)
    if (space.is_boundary(v) && s.at(v).squaredNorm() > tol) return false;
  return true;
}

/// Norm of s(z) in the quotient Gamma / Gamma_z. The infimum over sections through s(z) is
/// attained by the evaluation itself.
inline double fiber_quotient_norm(const SectionField& s, VertexId z) { return s.at(z).norm(); }

/// True iff the inner products of the sample family have no common zero.
inline bool is_full(std::span<const SectionField> samples, double tol = tol::algebraic) {
  if (samples.empty()) return false;
  const auto n = samples.front().vertex_count();
  for (VertexId v = 0; v < n; ++v) {
    bool hit = false;
    for (const auto& s : samples)
      if (s.at(v).squaredNorm() > tol) {
        hit = true;
        break;
      }
    if (!hit) return false;
  }
  return true;
}

/// A phi-morphism Gamma(source) -> Gamma(target) where phi = f^ is dual to the vertex map
/// f: target vertices -> source vertices. The image of s is z |-> T(z) s(f(z)).
struct ModuleMorphism {
  BundlePtr source;
  BundlePtr target;
  std::vector<VertexId> vertex_map;
  std::vector<Matrix> fiber_transform;

  void check_shape() const {
    if (!source || !target) throw IncompatibleData("morphism without source or target bundle");
    const auto n = target->vertex_count();
    if (vertex_map.size() != n || fiber_transform.size() != n)
      throw IncompatibleData("morphism data does not cover every target vertex");
    for (VertexId z = 0; z < n; ++z) {
      if (vertex_map[z] >= source->vertex_count())
        throw IncompatibleData("vertex map sends " + std::to_string(z) + " outside the source space");
      if (fiber_transform[z].rows() != target->ambient_dim() || fiber_transform[z].cols() != source->ambient_dim())
        throw IncompatibleData("fibre transform at vertex " + std::to_string(z) + " has the wrong shape");
    }
  }
};

inline ModuleMorphism identity_morphism(const BundlePtr& bundle) {
  ModuleMorphism out{bundle, bundle, {}, {}};
  for (VertexId v = 0; v < bundle->vertex_count(); ++v) {
    out.vertex_map.push_back(v);
    out.fiber_transform.push_back(bundle->value(v));
  }
  return out;
}

inline SectionField apply_morphism(const ModuleMorphism& phi, const SectionField& s, double tol = tol::algebraic) {
  phi.check_shape();
  if (!same_bundle(*s.bundle(), *phi.source)) throw BundleMismatch("apply_morphism: section is not over the source");
  std::vector<Vector> vals;
  vals.reserve(phi.target->vertex_count());
  for (VertexId z = 0; z < phi.target->vertex_count(); ++z)
    vals.emplace_back(phi.fiber_transform[z] * s.at(phi.vertex_map[z]));
  return SectionField(phi.target, std::move(vals), tol);
}

/// Outcome of a morphism-axiom check; on failure names the first offending sample and vertex.
struct MorphismCheck {
  bool ok = true;
  std::size_t sample = 0;
  VertexId vertex = 0;
  double residual = 0.0;
  std::string what;

  explicit operator bool() const noexcept { return ok; }
};

using SectionPair = std::pair<SectionField, SectionField>;

/// Checks <Phi v, Phi v'>(z) = <v, v'>(f(z)) and linearity of Phi on every sample pair.
inline MorphismCheck check_morphism_report(const ModuleMorphism& phi, std::span<const SectionPair> samples,
                                           double tol = tol::algebraic) {
  MorphismCheck out;
  try {
    phi.check_shape();
  } catch (const Error& e) {
    return MorphismCheck{false, 0, 0, 0.0, e.what()};
  }
  const cplx c(0.6, -0.8);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& [v, w] = samples[i];
    try {
      const auto pv = apply_morphism(phi, v, tol);
      const auto pw = apply_morphism(phi, w, tol);
      const auto lhs = inner_product(pv, pw);
      const auto rhs = inner_product(v, w);
      for (VertexId z = 0; z < lhs.values.size(); ++z) {
        const double r = std::abs(lhs[z] - rhs[phi.vertex_map[z]]);
        if (r > tol) return MorphismCheck{false, i, z, r, "inner product not preserved"};
      }
      const auto combo = apply_morphism(phi, add(v, w, c), tol);
      for (VertexId z = 0; z < combo.vertex_count(); ++z) {
        const double r = (combo.at(z) - pv.at(z) - c * pw.at(z)).norm();
        if (r > tol) return MorphismCheck{false, i, z, r, "not linear"};
      }
    } catch (const InvalidSection& e) {
      return MorphismCheck{false, i, 0, 0.0, std::string("image leaves the target bundle: ") + e.what()};
    }
  }
  return out;
}

inline bool check_morphism(const ModuleMorphism& phi, std::span<const SectionPair> samples,
                           double tol = tol::algebraic) {
  return check_morphism_report(phi, samples, tol).ok;
}

inline std::vector<SectionPair> random_section_pairs(const BundlePtr& bundle, std::size_t count, std::mt19937_64& rng) {
  std::vector<SectionPair> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto a = random_section(bundle, rng);
    auto b = random_section(bundle, rng);
    out.emplace_back(std::move(a), std::move(b));
  }
  return out;
}

}  // namespace hilbext
