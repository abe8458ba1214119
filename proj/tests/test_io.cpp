#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "hilbext/io.hpp"

using namespace hilbext;
using io::json;

namespace {

/// Serialise to text and parse back, as a file roundtrip would.
json through_text(const json& j) { return json::parse(j.dump()); }

std::vector<VertexId> identity_map(std::size_t n) {
  std::vector<VertexId> f(n);
  for (VertexId i = 0; i < n; ++i) f[i] = i;
  return f;
}

}  // namespace

class Serialisation : public ::testing::Test {
protected:
  std::mt19937_64 rng{1729};
};

TEST_F(Serialisation, ComplexAndMatrixValues) {
  const cplx c(0.1, -2.5e-17);
  EXPECT_EQ(io::complex_from_json(through_text(io::to_json(c))), c);
  const Matrix m = linalg::random_gaussian(3, 2, rng);
  EXPECT_EQ(io::matrix_from_json(through_text(io::matrix_to_json(m))), m);
  const Vector v = linalg::random_gaussian(4, 1, rng);
  EXPECT_EQ(io::vector_from_json(through_text(io::vector_to_json(v))), v);
}

TEST_F(Serialisation, MeshRoundtrip) {
  const auto d = fixture::disk(3, 12);
  const auto back = io::mesh_from_json(through_text(io::mesh_to_json(*d)));
  EXPECT_TRUE(*back == *d);
  const auto sub = boundary_subcomplex(*d);
  const auto sub_back = io::mesh_from_json(through_text(io::mesh_to_json(*sub.space)));
  EXPECT_TRUE(*sub_back == *sub.space);
  EXPECT_EQ(sub_back->connectivity(), SimplicialSpace::Connectivity::AllowDisconnected);
}

TEST_F(Serialisation, MeshWithoutCoordinates) {
  const SimplicialSpace bare(3, {}, {{0, 1}, {1, 2}}, {}, {});
  const auto back = io::mesh_from_json(through_text(io::mesh_to_json(bare)));
  EXPECT_TRUE(*back == bare);
  EXPECT_FALSE(back->has_coordinates());
}

TEST_F(Serialisation, BundleAndSectionRoundtrip) {
  const auto d = fixture::disk(2, 8);
  const auto xi = fixture::smooth_field(d, 3, 2, rng);
  const auto back = io::bundle_from_json(through_text(io::bundle_to_json(*xi)), d);
  EXPECT_TRUE(same_bundle(*back, *xi));
  const auto s = random_section(xi, rng);
  const auto s_back = io::section_from_json(through_text(io::section_to_json(s, "xi")), back);
  EXPECT_EQ(s_back.values(), s.values());
}

TEST_F(Serialisation, IsometryRoundtrip) {
  const auto tower = annulus_tower(2, 16);
  const auto corona = corona_space(tower);
  const auto xi = fixture::smooth_field(corona, 3, 1, rng);
  const auto zeta = fixture::smooth_field(corona, 3, 2, rng);
  const auto d = random_isometry_field(xi, identity_map(16), zeta, rng);
  const auto back = io::isometry_from_json(through_text(io::isometry_to_json(d)), xi, zeta);
  EXPECT_EQ(back.vertex_map(), d.vertex_map());
  EXPECT_EQ(max_entry_difference(back.values(), d.values()), 0.0);
}

TEST_F(Serialisation, RecordRoundtrip) {
  for (const auto& r : {InvariantRecord::finite({3}), InvariantRecord::finite({1, -2}), InvariantRecord::infinite()})
    EXPECT_EQ(io::record_from_json(through_text(io::record_to_json(r))), r);
  EXPECT_THROW((void)io::record_from_json(json{{"kind", "other"}}), io::ParseError);
}

TEST_F(Serialisation, ExtensionDescriptorRoundtrip) {
  const auto d = fixture::disk(3, 16);
  const auto tower = annulus_tower(2, 16);
  for (int k : {-1, 0, 2}) {
    const auto ext = build_Wk_extension(k, d);
    const auto desc = io::extension_from_json(through_text(io::extension_to_json(ext, "disk-wk")));
    EXPECT_EQ(desc.example, "disk-wk");
    ASSERT_TRUE(desc.ext.winding.has_value());
    EXPECT_EQ(desc.ext.winding->k, k);
    EXPECT_FALSE(desc.busby.has_value());
    EXPECT_EQ(stabilized_invariant(desc.ext, tower), InvariantRecord::finite({k}));
    const auto a = busby_invariant(ext, tower);
    const auto b = busby_invariant(desc.ext, tower);
    EXPECT_LE(max_entry_difference(a.values(), b.values()), 1e-12);
  }
  const auto split = io::extension_from_json(through_text(io::extension_to_json(build_split_extension(d), "split")));
  EXPECT_FALSE(split.ext.winding.has_value());
  EXPECT_EQ(stabilized_invariant(split.ext, tower), InvariantRecord::finite({0}));
}

TEST_F(Serialisation, OperatorDescriptorRoundtrip) {
  auto op = power_symbol_operator(2, 32);
  op.perturbation = random_perturbation(3, 1, rng);
  const auto back = io::operator_from_json(through_text(io::operator_to_json(op)));
  EXPECT_EQ(back.symbol, op.symbol);
  EXPECT_EQ(back.perturbation, op.perturbation);
  EXPECT_FALSE(back.infinite_defect);
  EXPECT_EQ(fredholm_index(back), ExtensionClass::finite(-2));
}

TEST_F(Serialisation, MalformedInputIsAParseError) {
  EXPECT_THROW((void)io::complex_from_json(json{1.0}), io::ParseError);
  EXPECT_THROW((void)io::matrix_from_json(json::parse("[[[1,0]],[[1,0],[0,0]]]")), io::ParseError);
  EXPECT_THROW((void)io::mesh_from_json(json{{"vertices", json::array()}}), io::ParseError);
  EXPECT_THROW((void)io::mesh_from_json(json::parse(R"({"vertices":[[0,0],null],"edges":[],"triangles":[],"boundary":[]})")),
               io::ParseError);
  EXPECT_THROW((void)io::mesh_from_json(json::parse(R"({"vertices":[[0,0]],"edges":[],"triangles":[],"boundary":[4]})")),
               io::ParseError);
  const auto d = fixture::disk(1, 4);
  json bundle = io::bundle_to_json(*trivial_bundle(d, 1));
  bundle["values"].erase("2");
  EXPECT_THROW((void)io::bundle_from_json(bundle, d), io::ParseError);
  EXPECT_THROW((void)io::operator_from_json(json{{"type", "extension"}}), io::ParseError);
  EXPECT_THROW((void)io::extension_from_json(json{{"type", "operator"}}), io::ParseError);
}

TEST_F(Serialisation, InvalidContentKeepsItsOwnError) {
  const auto d = fixture::disk(1, 4);
  json bundle = io::bundle_to_json(*trivial_bundle(d, 1));
  bundle["values"]["2"] = io::matrix_to_json(Matrix::Constant(1, 1, 2.0));
  EXPECT_THROW((void)io::bundle_from_json(bundle, d), InvalidBundle);
  json mesh = io::mesh_to_json(*d);
  mesh["edges"].push_back({0, 9});
  EXPECT_THROW((void)io::mesh_from_json(mesh), InvalidMesh);
}
