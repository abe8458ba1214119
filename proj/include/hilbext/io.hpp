#pragma once

// JSON interchange for meshes, bundles, sections, isometry fields, invariant records and the
// extension/operator descriptors used by the command-line tool. Vertex-indexed tables are JSON
// objects keyed by the decimal vertex index; complex numbers are [re, im] pairs and matrices
// are row-major lists of rows.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "invariants.hpp"

namespace hilbext::io {

using json = nlohmann::json;

/// Malformed or inconsistent JSON input.
class ParseError : public Error {
public:
  using Error::Error;
  [[nodiscard]] const char* kind() const noexcept override { return "ParseError"; }
};

inline json to_json(cplx c) { return json::array({c.real(), c.imag()}); }

inline cplx complex_from_json(const json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw ParseError("complex numbers are [re, im] pairs");
  return {j[0].get<double>(), j[1].get<double>()};
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("matrices are lists of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows == 0 ? Eigen::Index{0} : static_cast<Eigen::Index>(j[0].size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("ragged matrix");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)]);
  }
  return m;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

inline Vector vector_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("vectors are lists of [re, im] pairs");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
  return v;
}

inline json loop_to_json(const std::vector<cplx>& loop) {
  json out = json::array();
  for (auto c : loop) out.push_back(to_json(c));
  return out;
}

inline std::vector<cplx> loop_from_json(const json& j) {
  if (!j.is_array()) throw ParseError("loops are lists of [re, im] pairs");
  std::vector<cplx> out;
  for (const auto& c : j) out.push_back(complex_from_json(c));
  return out;
}

/// Reads a vertex-keyed object into a dense table of `n` entries; every vertex must appear.
template <typename T, typename Read>
std::vector<T> vertex_table(const json& j, std::size_t n, Read read, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + " must be an object keyed by vertex index");
  std::vector<std::optional<T>> slots(n);
  for (const auto& [key, value] : j.items()) {
    std::size_t v = 0;
    try {
      std::size_t used = 0;
      v = std::stoul(key, &used);
      if (used != key.size()) throw std::invalid_argument(key);
    } catch (const std::exception&) {
      throw ParseError(std::string(what) + ": bad vertex key '" + key + "'");
    }
    if (v >= n) throw ParseError(std::string(what) + ": vertex " + key + " out of range");
    slots[v] = read(value);
  }
  std::vector<T> out;
  for (std::size_t v = 0; v < n; ++v) {
    if (!slots[v]) throw ParseError(std::string(what) + ": vertex " + std::to_string(v) + " missing");
    out.push_back(std::move(*slots[v]));
  }
  return out;
}

// --- mesh -----------------------------------------------------------------------------------

inline json mesh_to_json(const SimplicialSpace& s) {
  json j;
  j["vertices"] = json::array();
  for (VertexId v = 0; v < s.vertex_count(); ++v) {
    if (s.has_coordinates()) j["vertices"].push_back({s.coordinate(v).x(), s.coordinate(v).y()});
    else j["vertices"].push_back(nullptr);
  }
  j["edges"] = json::array();
  for (const auto& e : s.edges()) j["edges"].push_back({e[0], e[1]});
  j["triangles"] = json::array();
  for (const auto& t : s.triangles()) j["triangles"].push_back({t[0], t[1], t[2]});
  j["boundary"] = s.boundary_vertices();
  if (s.connectivity() == SimplicialSpace::Connectivity::AllowDisconnected) j["connected"] = false;
  return j;
}

inline SpacePtr mesh_from_json(const json& j) {
  try {
    const auto& verts = j.at("vertices");
    const auto n = verts.size();
    std::vector<Point> coords;
    const bool with_coords = n > 0 && !verts[0].is_null();
    for (const auto& p : verts) {
      if (with_coords != !p.is_null()) throw ParseError("either all or no vertices carry coordinates");
      if (with_coords) coords.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) edges.push_back({e.at(0).get<VertexId>(), e.at(1).get<VertexId>()});
    std::vector<Triangle> tris;
    for (const auto& t : j.at("triangles"))
      tris.push_back({t.at(0).get<VertexId>(), t.at(1).get<VertexId>(), t.at(2).get<VertexId>()});
    std::vector<bool> boundary(n, false);
    for (const auto& b : j.at("boundary")) {
      const auto v = b.get<VertexId>();
      if (v >= n) throw ParseError("boundary vertex out of range");
      boundary[v] = true;
    }
    const auto conn = j.value("connected", true) ? SimplicialSpace::Connectivity::Connected
                                                 : SimplicialSpace::Connectivity::AllowDisconnected;
    return std::make_shared<const SimplicialSpace>(n, std::move(coords), std::move(edges), std::move(tris),
                                                   std::move(boundary), conn);
  } catch (const json::exception& e) {
    throw ParseError(std::string("mesh: ") + e.what());
  }
}

// --- bundles and sections -------------------------------------------------------------------

inline json bundle_to_json(const ProjectionField& p) {
  json j;
  j["m"] = p.ambient_dim();
  j["values"] = json::object();
  for (VertexId v = 0; v < p.vertex_count(); ++v) j["values"][std::to_string(v)] = matrix_to_json(p.value(v));
  return j;
}

inline BundlePtr bundle_from_json(const json& j, SpacePtr space, double tol = tol::algebraic) {
  try {
    const auto m = j.at("m").get<Eigen::Index>();
    auto values = vertex_table<Matrix>(j.at("values"), space->vertex_count(), matrix_from_json, "bundle values");
    return std::make_shared<const ProjectionField>(std::move(space), m, std::move(values), tol);
  } catch (const json::exception& e) {
    throw ParseError(std::string("bundle: ") + e.what());
  }
}

inline json section_to_json(const SectionField& s, const std::string& bundle_ref) {
  json j;
  j["bundle"] = bundle_ref;
  j["values"] = json::object();
  for (VertexId v = 0; v < s.vertex_count(); ++v) j["values"][std::to_string(v)] = vector_to_json(s.at(v));
  return j;
}

inline SectionField section_from_json(const json& j, BundlePtr bundle) {
  try {
    auto values = vertex_table<Vector>(j.at("values"), bundle->vertex_count(), vector_from_json, "section values");
    return SectionField(std::move(bundle), std::move(values));
  } catch (const json::exception& e) {
    throw ParseError(std::string("section: ") + e.what());
  }
}

// --- isometry fields ------------------------------------------------------------------------

inline json isometry_to_json(std::span<const VertexId> vertex_map, std::span<const Matrix> values,
                             Eigen::Index m_source, Eigen::Index m_target) {
  json j;
  j["m_source"] = m_source;
  j["m_target"] = m_target;
  j["values"] = json::object();
  j["vertex_map"] = json::object();
  for (VertexId z = 0; z < values.size(); ++z) {
    j["values"][std::to_string(z)] = matrix_to_json(values[z]);
    j["vertex_map"][std::to_string(z)] = vertex_map[z];
  }
  return j;
}

inline json isometry_to_json(const IsometryField& d) {
  return isometry_to_json(d.vertex_map(), d.values(), d.source()->ambient_dim(), d.target()->ambient_dim());
}

/// Vertex map and matrices of an isometry field, not yet validated against any bundles.
struct RawIsometry {
  std::vector<VertexId> vertex_map;
  std::vector<Matrix> values;
};

inline RawIsometry raw_isometry_from_json(const json& j, std::size_t base_vertices) {
  try {
    RawIsometry raw;
    raw.values = vertex_table<Matrix>(j.at("values"), base_vertices, matrix_from_json, "isometry values");
    raw.vertex_map = vertex_table<VertexId>(
        j.at("vertex_map"), base_vertices, [](const json& x) { return x.get<VertexId>(); }, "vertex_map");
    return raw;
  } catch (const json::exception& e) {
    throw ParseError(std::string("isometry field: ") + e.what());
  }
}

inline IsometryField isometry_from_json(const json& j, BundlePtr source, BundlePtr target,
                                        double tol = tol::algebraic) {
  auto raw = raw_isometry_from_json(j, target->vertex_count());
  return IsometryField(std::move(source), std::move(raw.vertex_map), std::move(target), std::move(raw.values), tol);
}

inline json certificate_to_json(std::span<const IsometryField> path) {
  json out = json::array();
  for (const auto& d : path) out.push_back(isometry_to_json(d));
  return out;
}

// --- invariant records ----------------------------------------------------------------------

inline json record_to_json(const InvariantRecord& r) {
  if (r.kind == InvariantRecord::Kind::Infinite) return json{{"kind", "infinite"}};
  return json{{"kind", "finite"}, {"windings", r.windings}};
}

inline InvariantRecord record_from_json(const json& j) {
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "infinite") return InvariantRecord::infinite();
  if (kind == "finite") return InvariantRecord::finite(j.at("windings").get<std::vector<int>>());
  throw ParseError("unknown record kind '" + kind + "'");
}

// --- descriptors ----------------------------------------------------------------------------

struct ExtensionDescriptor {
  std::string example;
  ExtensionTriple ext;
  /// Optional stored Busby field, kept raw so that corrupted data can be diagnosed.
  std::optional<json> busby;
};

inline json extension_to_json(const ExtensionTriple& ext, const std::string& example) {
  json j;
  j["type"] = "extension";
  j["example"] = example;
  if (ext.winding) {
    j["k"] = ext.winding->k;
    j["omega"] = loop_to_json(ext.winding->omega);
  }
  j["mesh"] = mesh_to_json(*ext.space());
  j["z_mesh"] = mesh_to_json(*ext.z_bundle->space());
  j["v_bundle"] = bundle_to_json(*ext.v_bundle);
  j["z_bundle"] = bundle_to_json(*ext.z_bundle);
  j["boundary"] = json::array();
  j["gluing"] = json::object();
  for (std::size_t i = 0; i < ext.boundary.size(); ++i) {
    j["boundary"].push_back({ext.boundary[i], ext.boundary_to_z[i]});
    j["gluing"][std::to_string(ext.boundary[i])] = matrix_to_json(ext.gluing[i]);
  }
  j["agreement_tolerance"] = ext.agreement_tol;
  return j;
}

inline ExtensionDescriptor extension_from_json(const json& j) {
  try {
    if (j.at("type").get<std::string>() != "extension") throw ParseError("descriptor is not an extension");
    ExtensionDescriptor out;
    out.example = j.value("example", std::string("custom"));
    auto space = mesh_from_json(j.at("mesh"));
    auto zspace = mesh_from_json(j.at("z_mesh"));
    auto eta = bundle_from_json(j.at("v_bundle"), space);
    auto xi = bundle_from_json(j.at("z_bundle"), zspace);
    std::vector<VertexId> boundary;
    std::vector<VertexId> g;
    std::vector<Matrix> gluing;
    const auto& glue = j.at("gluing");
    for (const auto& pair : j.at("boundary")) {
      boundary.push_back(pair.at(0).get<VertexId>());
      g.push_back(pair.at(1).get<VertexId>());
      gluing.push_back(matrix_from_json(glue.at(std::to_string(boundary.back()))));
    }
    const double agree = j.value("agreement_tolerance", tol::algebraic);
    out.ext = make_extension(eta, xi, std::move(boundary), std::move(g), std::move(gluing), agree);
    if (j.contains("omega")) out.ext.winding = WindingDatum::make(loop_from_json(j.at("omega")), j.at("k").get<int>());
    if (j.contains("busby")) out.busby = j.at("busby");
    return out;
  } catch (const json::exception& e) {
    throw ParseError(std::string("extension descriptor: ") + e.what());
  }
}

inline json operator_to_json(const StructuredOperator& op) {
  json j;
  j["type"] = "operator";
  j["symbol"] = loop_to_json(op.symbol);
  j["perturbation"] = matrix_to_json(op.perturbation);
  j["infinite_defect"] = op.infinite_defect;
  return j;
}

inline StructuredOperator operator_from_json(const json& j) {
  try {
    if (j.at("type").get<std::string>() != "operator") throw ParseError("descriptor is not an operator");
    StructuredOperator op;
    op.symbol = loop_from_json(j.at("symbol"));
    op.perturbation = j.contains("perturbation") ? matrix_from_json(j.at("perturbation")) : Matrix(0, 0);
    op.infinite_defect = j.value("infinite_defect", false);
    return op;
  } catch (const json::exception& e) {
    throw ParseError(std::string("operator descriptor: ") + e.what());
  }
}

}  // namespace hilbext::io
