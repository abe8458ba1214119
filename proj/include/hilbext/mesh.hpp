#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numbers>
#include <queue>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"

namespace hilbext {

using VertexId = std::size_t;
using Edge = std::array<VertexId, 2>;
using Triangle = std::array<VertexId, 3>;
using Point = Eigen::Vector2d;

/// Largest mesh the builders will produce.
inline constexpr std::size_t kMaxVertices = 10'000;

/// Finite simplicial complex of dimension at most two with a marked boundary.
///
/// Edges and triangles are stored with sorted vertex indices. The boundary
/// subcomplex consists of the flagged vertices together with those edges whose
/// endpoints are both flagged and which are faces of fewer than two triangles;
/// for a triangulated surface these are exactly the edges on its frontier.
/// Instances are immutable once constructed and validate themselves.
class SimplicialSpace {
public:
  enum class Connectivity { Connected, AllowDisconnected };

  SimplicialSpace() = default;

  SimplicialSpace(std::size_t vertex_count, std::vector<Point> coordinates, std::vector<Edge> edges,
                  std::vector<Triangle> triangles, std::vector<bool> boundary,
                  Connectivity connectivity = Connectivity::Connected)
      : n_(vertex_count),
        coords_(std::move(coordinates)),
        edges_(std::move(edges)),
        triangles_(std::move(triangles)),
        boundary_(std::move(boundary)),
        connectivity_(connectivity) {
    normalize_and_validate();
  }

  [[nodiscard]] std::size_t vertex_count() const noexcept { return n_; }
  [[nodiscard]] const std::vector<Edge>& edges() const noexcept { return edges_; }
  [[nodiscard]] const std::vector<Triangle>& triangles() const noexcept { return triangles_; }
  [[nodiscard]] bool has_coordinates() const noexcept { return !coords_.empty(); }
  [[nodiscard]] const std::vector<Point>& coordinates() const noexcept { return coords_; }
  [[nodiscard]] const Point& coordinate(VertexId v) const { return coords_.at(v); }
  [[nodiscard]] bool is_boundary(VertexId v) const { return boundary_.at(v); }
  [[nodiscard]] const std::vector<bool>& boundary_flags() const noexcept { return boundary_; }
  [[nodiscard]] Connectivity connectivity() const noexcept { return connectivity_; }

  [[nodiscard]] std::vector<VertexId> boundary_vertices() const {
    std::vector<VertexId> out;
    for (VertexId v = 0; v < n_; ++v)
      if (boundary_[v]) out.push_back(v);
    return out;
  }

  [[nodiscard]] bool has_edge(VertexId u, VertexId v) const {
    const Edge e{std::min(u, v), std::max(u, v)};
    return std::binary_search(edges_.begin(), edges_.end(), e);
  }

  [[nodiscard]] const std::vector<VertexId>& neighbors(VertexId v) const { return adjacency_.at(v); }

  /// Number of triangles having `e` as a face.
  [[nodiscard]] int triangle_count(const Edge& e) const {
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
    if (it == edges_.end() || *it != e) return 0;
    return edge_triangles_[static_cast<std::size_t>(it - edges_.begin())];
  }

  [[nodiscard]] bool is_boundary_edge(const Edge& e) const {
    return boundary_[e[0]] && boundary_[e[1]] && triangle_count(e) < 2;
  }

  /// Connected component index of each vertex; components are numbered by their smallest vertex.
  [[nodiscard]] const std::vector<std::size_t>& component_of() const noexcept { return component_; }
  [[nodiscard]] std::size_t component_count() const noexcept { return component_count_; }

  friend bool operator==(const SimplicialSpace& a, const SimplicialSpace& b) {
    return a.n_ == b.n_ && a.coords_ == b.coords_ && a.edges_ == b.edges_ && a.triangles_ == b.triangles_ &&
           a.boundary_ == b.boundary_;
  }

private:
  void normalize_and_validate() {
    if (!coords_.empty() && coords_.size() != n_)
      throw InvalidMesh("coordinate count " + std::to_string(coords_.size()) + " does not match vertex count " +
                        std::to_string(n_));
    if (boundary_.empty()) boundary_.assign(n_, false);
    if (boundary_.size() != n_) throw InvalidMesh("boundary flag count does not match vertex count");

    for (auto& e : edges_) {
      if (e[0] >= n_ || e[1] >= n_) throw InvalidMesh("edge references a missing vertex");
      if (e[0] == e[1]) throw InvalidMesh("degenerate edge at vertex " + std::to_string(e[0]));
      if (e[0] > e[1]) std::swap(e[0], e[1]);
    }
    std::sort(edges_.begin(), edges_.end());
    if (std::adjacent_find(edges_.begin(), edges_.end()) != edges_.end()) throw InvalidMesh("duplicate edge");

    edge_triangles_.assign(edges_.size(), 0);
    for (auto& t : triangles_) {
      for (auto v : t)
        if (v >= n_) throw InvalidMesh("triangle references a missing vertex");
      std::sort(t.begin(), t.end());
      if (t[0] == t[1] || t[1] == t[2]) throw InvalidMesh("degenerate triangle");
      for (const Edge& e : {Edge{t[0], t[1]}, Edge{t[1], t[2]}, Edge{t[0], t[2]}}) {
        const auto it = std::lower_bound(edges_.begin(), edges_.end(), e);
        if (it == edges_.end() || *it != e)
          throw InvalidMesh("triangle edge (" + std::to_string(e[0]) + "," + std::to_string(e[1]) + ") is missing");
        ++edge_triangles_[static_cast<std::size_t>(it - edges_.begin())];
      }
    }
    std::sort(triangles_.begin(), triangles_.end());
    if (std::adjacent_find(triangles_.begin(), triangles_.end()) != triangles_.end())
      throw InvalidMesh("duplicate triangle");

    adjacency_.assign(n_, {});
    for (const auto& e : edges_) {
      adjacency_[e[0]].push_back(e[1]);
      adjacency_[e[1]].push_back(e[0]);
    }
    for (auto& nb : adjacency_) std::sort(nb.begin(), nb.end());

    component_.assign(n_, n_);
    component_count_ = 0;
    for (VertexId s = 0; s < n_; ++s) {
      if (component_[s] != n_) continue;
      std::queue<VertexId> q;
      q.push(s);
      component_[s] = component_count_;
      while (!q.empty()) {
        const auto v = q.front();
        q.pop();
        for (auto w : adjacency_[v])
          if (component_[w] == n_) {
            component_[w] = component_count_;
            q.push(w);
          }
      }
      ++component_count_;
    }
    if (connectivity_ == Connectivity::Connected && component_count_ > 1)
      throw InvalidMesh("1-skeleton has " + std::to_string(component_count_) + " components");
  }

  std::size_t n_ = 0;
  std::vector<Point> coords_;
  std::vector<Edge> edges_;
  std::vector<Triangle> triangles_;
  std::vector<bool> boundary_;
  Connectivity connectivity_ = Connectivity::Connected;
  std::vector<int> edge_triangles_;
  std::vector<std::vector<VertexId>> adjacency_;
  std::vector<std::size_t> component_;
  std::size_t component_count_ = 0;
};

using SpacePtr = std::shared_ptr<const SimplicialSpace>;

/// A subcomplex together with the parent index of each of its vertices.
struct Subcomplex {
  SpacePtr space;
  std::vector<VertexId> to_parent;
};

/// Nested annuli U \ U_r for increasing r, all sharing the outer ring.
struct AnnulusTower {
  std::vector<SpacePtr> levels;
  std::vector<double> radii;
  /// Outer frontier of each level, in angular order.
  std::vector<std::vector<VertexId>> corona_cycles;
  std::size_t n_angular = 0;
};

namespace detail {

inline void check_mesh_size(std::size_t n) {
  if (n > kMaxVertices)
    throw InvalidArgument("mesh would have " + std::to_string(n) + " vertices; cap is " +
                          std::to_string(kMaxVertices));
}

/// Concentric rings at the given radii (outermost first), joined by triangulated strips.
/// Ring l occupies vertex ids [offset + l*n_angular, offset + (l+1)*n_angular).
inline void add_rings(const std::vector<double>& radii, std::size_t n_angular, std::size_t offset,
                      std::vector<Point>& coords, std::vector<Edge>& edges, std::vector<Triangle>& tris) {
  const auto id = [&](std::size_t ring, std::size_t j) { return offset + ring * n_angular + (j % n_angular); };
  for (std::size_t l = 0; l < radii.size(); ++l) {
    for (std::size_t j = 0; j < n_angular; ++j) {
      const double theta = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_angular);
      coords.emplace_back(radii[l] * std::cos(theta), radii[l] * std::sin(theta));
      edges.push_back({id(l, j), id(l, j + 1)});
    }
  }
  for (std::size_t l = 0; l + 1 < radii.size(); ++l) {
    for (std::size_t j = 0; j < n_angular; ++j) {
      edges.push_back({id(l, j), id(l + 1, j)});
      edges.push_back({id(l, j), id(l + 1, j + 1)});
      tris.push_back({id(l, j), id(l, j + 1), id(l + 1, j + 1)});
      tris.push_back({id(l, j), id(l + 1, j), id(l + 1, j + 1)});
    }
  }
}

inline SimplicialSpace annulus_from_radii(const std::vector<double>& radii, std::size_t n_angular) {
  std::vector<Point> coords;
  std::vector<Edge> edges;
  std::vector<Triangle> tris;
  add_rings(radii, n_angular, 0, coords, edges, tris);
  std::vector<bool> boundary(coords.size(), false);
  for (std::size_t j = 0; j < n_angular; ++j) {
    boundary[j] = true;
    boundary[(radii.size() - 1) * n_angular + j] = true;
  }
  const auto n = coords.size();
  return SimplicialSpace(n, std::move(coords), std::move(edges), std::move(tris), std::move(boundary));
}

}  // namespace detail

/// Triangulated closed unit disk: a centre vertex and `n_radial` rings of `n_angular` vertices.
/// The outermost ring is the boundary and occupies the last `n_angular` vertex ids.
inline SimplicialSpace build_disk_mesh(std::size_t n_radial, std::size_t n_angular) {
  if (n_radial < 1) throw InvalidArgument("n_radial must be positive");
  if (n_angular < 3) throw InvalidArgument("n_angular must be at least 3");
  detail::check_mesh_size(n_radial * n_angular + 1);

  std::vector<Point> coords{Point(0.0, 0.0)};
  std::vector<Edge> edges;
  std::vector<Triangle> tris;
  // rings innermost first, so the boundary ring ends up last
  std::vector<double> radii;
  for (std::size_t i = 1; i <= n_radial; ++i) radii.push_back(static_cast<double>(i) / static_cast<double>(n_radial));
  detail::add_rings(radii, n_angular, 1, coords, edges, tris);
  for (std::size_t j = 0; j < n_angular; ++j) {
    const VertexId a = 1 + j;
    const VertexId b = 1 + (j + 1) % n_angular;
    edges.push_back({0, a});
    tris.push_back({0, a, b});
  }
  std::vector<bool> boundary(coords.size(), false);
  for (std::size_t j = 0; j < n_angular; ++j) boundary[1 + (n_radial - 1) * n_angular + j] = true;
  const auto n = coords.size();
  return SimplicialSpace(n, std::move(coords), std::move(edges), std::move(tris), std::move(boundary));
}

/// Triangulated closed annulus r_inner <= |z| <= 1 with both rings marked as boundary.
/// The outer ring is vertices [0, n_angular) in angular order.
inline SimplicialSpace build_annulus_mesh(double r_inner, std::size_t n_radial, std::size_t n_angular) {
  if (!(r_inner > 0.0 && r_inner < 1.0)) throw InvalidArgument("r_inner must lie in (0, 1)");
  if (n_radial < 1) throw InvalidArgument("n_radial must be positive");
  if (n_angular < 3) throw InvalidArgument("n_angular must be at least 3");
  detail::check_mesh_size((n_radial + 1) * n_angular);
  std::vector<double> radii;
  for (std::size_t l = 0; l <= n_radial; ++l)
    radii.push_back(1.0 - (1.0 - r_inner) * static_cast<double>(l) / static_cast<double>(n_radial));
  return detail::annulus_from_radii(radii, n_angular);
}

/// True iff every vertex, edge and triangle of `sub` appears in `super` with the same index
/// (and the same coordinates when both carry them).
inline bool is_subcomplex(const SimplicialSpace& sub, const SimplicialSpace& super) {
  if (sub.vertex_count() > super.vertex_count()) return false;
  if (sub.has_coordinates() && super.has_coordinates())
    for (VertexId v = 0; v < sub.vertex_count(); ++v)
      if ((sub.coordinate(v) - super.coordinate(v)).norm() > 1e-12) return false;
  for (const auto& e : sub.edges())
    if (!super.has_edge(e[0], e[1])) return false;
  return std::all_of(sub.triangles().begin(), sub.triangles().end(), [&](const Triangle& t) {
    return std::binary_search(super.triangles().begin(), super.triangles().end(), t);
  });
}

/// Exhaustion of U \ U_r by annuli r_t <= |z| <= 1 with r_t = t / (n_levels + 1), t = 1..n_levels.
/// Level t+1 is a subcomplex of level t; every level shares the outer ring as its corona cycle.
inline AnnulusTower annulus_tower(std::size_t n_levels, std::size_t n_angular) {
  if (n_levels < 2) throw InvalidArgument("an annulus tower needs at least two levels");
  if (n_angular < 3) throw InvalidArgument("n_angular must be at least 3");
  detail::check_mesh_size((n_levels + 1) * n_angular);

  AnnulusTower tower;
  tower.n_angular = n_angular;
  std::vector<double> all_radii;  // descending: outer ring, r_n, ..., r_1
  all_radii.push_back(1.0);
  for (std::size_t t = n_levels; t >= 1; --t)
    all_radii.push_back(static_cast<double>(t) / static_cast<double>(n_levels + 1));

  std::vector<VertexId> cycle(n_angular);
  for (std::size_t j = 0; j < n_angular; ++j) cycle[j] = j;
  for (std::size_t t = 1; t <= n_levels; ++t) {
    // level t keeps the rings with radius >= r_t
    const std::vector<double> radii(all_radii.begin(), all_radii.begin() + static_cast<long>(n_levels - t + 2));
    tower.levels.push_back(std::make_shared<const SimplicialSpace>(detail::annulus_from_radii(radii, n_angular)));
    tower.radii.push_back(static_cast<double>(t) / static_cast<double>(n_levels + 1));
    tower.corona_cycles.push_back(cycle);
  }
  for (std::size_t t = 0; t + 1 < tower.levels.size(); ++t)
    if (!is_subcomplex(*tower.levels[t + 1], *tower.levels[t]))
      throw InvalidMesh("annulus tower levels are not nested");
  return tower;
}

/// Induced boundary subcomplex (models the frontier of U). Vertices are renumbered in increasing
/// parent order; all of them stay flagged, so the operation is idempotent. Triangles are dropped.
inline Subcomplex boundary_subcomplex(const SimplicialSpace& space) {
  Subcomplex out;
  std::vector<VertexId> to_child(space.vertex_count(), space.vertex_count());
  for (VertexId v = 0; v < space.vertex_count(); ++v)
    if (space.is_boundary(v)) {
      to_child[v] = out.to_parent.size();
      out.to_parent.push_back(v);
    }
  std::vector<Point> coords;
  if (space.has_coordinates())
    for (auto v : out.to_parent) coords.push_back(space.coordinate(v));
  std::vector<Edge> edges;
  for (const auto& e : space.edges())
    if (space.is_boundary_edge(e)) edges.push_back({to_child[e[0]], to_child[e[1]]});
  const auto n = out.to_parent.size();
  out.space = std::make_shared<const SimplicialSpace>(n, std::move(coords), std::move(edges),
                                                      std::vector<Triangle>{}, std::vector<bool>(n, true),
                                                      SimplicialSpace::Connectivity::AllowDisconnected);
  return out;
}

/// A closed cycle graph on `coords.size()` vertices (edges j -- j+1 mod n), no boundary.
inline SimplicialSpace cycle_space(std::vector<Point> coords) {
  const auto n = coords.size();
  if (n < 3) throw InvalidArgument("a cycle needs at least three vertices");
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < n; ++j) edges.push_back({j, (j + 1) % n});
  return SimplicialSpace(n, std::move(coords), std::move(edges), {}, std::vector<bool>(n, false));
}

/// The corona cycle of the tower as a standalone space; vertex j is outer-ring vertex j of every level.
inline SpacePtr corona_space(const AnnulusTower& tower) {
  const auto& outer = *tower.levels.back();
  std::vector<Point> coords;
  for (auto v : tower.corona_cycles.back()) coords.push_back(outer.coordinate(v));
  return std::make_shared<const SimplicialSpace>(cycle_space(std::move(coords)));
}

/// A single vertex with no edges (the one-point frontier of U inside its one-point compactification).
inline SpacePtr point_space() {
  return std::make_shared<const SimplicialSpace>(1, std::vector<Point>{Point(1.0, 0.0)}, std::vector<Edge>{},
                                                 std::vector<Triangle>{}, std::vector<bool>{false});
}

/// Vertex order of a space that is a single simple cycle, starting at 0 towards its smaller neighbour.
inline std::vector<VertexId> cycle_order(const SimplicialSpace& space) {
  const auto n = space.vertex_count();
  if (n < 3 || space.edges().size() != n || space.component_count() != 1)
    throw InvalidMesh("space is not a single simple cycle");
  for (VertexId v = 0; v < n; ++v)
    if (space.neighbors(v).size() != 2) throw InvalidMesh("space is not a single simple cycle");
  std::vector<VertexId> order{0};
  VertexId prev = 0;
  VertexId cur = space.neighbors(0).front();
  while (cur != 0) {
    order.push_back(cur);
    const auto& nb = space.neighbors(cur);
    const VertexId next = nb[0] == prev ? nb[1] : nb[0];
    prev = cur;
    cur = next;
  }
  if (order.size() != n) throw InvalidMesh("space is not a single simple cycle");
  return order;
}

/// Fundamental cycles of the 1-skeleton with respect to a BFS spanning forest.
///
/// One cycle per non-tree edge (u, v), u < v, in sorted edge order. Each cycle is the vertex
/// sequence lca -> ... -> u, v -> ... -> (child of lca), traversed so that the non-tree edge runs
/// from u to v; the closing step back to lca is implicit.
inline std::vector<std::vector<VertexId>> fundamental_cycles(const SimplicialSpace& space) {
  const auto n = space.vertex_count();
  std::vector<VertexId> parent(n, n);
  std::vector<std::size_t> depth(n, 0);
  std::vector<bool> seen(n, false);
  for (VertexId root = 0; root < n; ++root) {
    if (seen[root]) continue;
    seen[root] = true;
    std::queue<VertexId> q;
    q.push(root);
    while (!q.empty()) {
      const auto v = q.front();
      q.pop();
      for (auto w : space.neighbors(v))
        if (!seen[w]) {
          seen[w] = true;
          parent[w] = v;
          depth[w] = depth[v] + 1;
          q.push(w);
        }
    }
  }
  std::vector<std::vector<VertexId>> cycles;
  for (const auto& e : space.edges()) {
    const auto u = e[0];
    const auto v = e[1];
    if (parent[u] == v || parent[v] == u) continue;
    std::vector<VertexId> up_u{u};
    std::vector<VertexId> up_v{v};
    VertexId a = u;
    VertexId b = v;
    while (depth[a] > depth[b]) up_u.push_back(a = parent[a]);
    while (depth[b] > depth[a]) up_v.push_back(b = parent[b]);
    while (a != b) {
      up_u.push_back(a = parent[a]);
      up_v.push_back(b = parent[b]);
    }
    // up_u = u .. lca, up_v = v .. lca
    std::vector<VertexId> cycle(up_u.rbegin(), up_u.rend());
    cycle.insert(cycle.end(), up_v.begin(), up_v.end() - 1);
    cycles.push_back(std::move(cycle));
  }
  return cycles;
}

}  // namespace hilbext
