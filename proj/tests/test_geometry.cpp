#include "darkroom/error.hpp"
#include "darkroom/geometry.hpp"
#include "darkroom/mesh_io.hpp"
#include "darkroom/primitives.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace darkroom;

namespace {

// Plane hit plus barycentric solve; shares no code with the library.
std::optional<std::pair<double, std::uint32_t>> brute_force(const TriangleMesh& mesh, const Ray& ray) {
  std::optional<std::pair<double, std::uint32_t>> best;
  for (std::uint32_t i = 0; i < mesh.triangles.size(); ++i) {
    const auto [a, b, c] = mesh.corners(i);
    const Vec3 n = cross(b - a, c - a);
    const double denom = dot(n, ray.direction);
    if (std::abs(denom) < 1e-15) continue;
    const double t = dot(n, a - ray.origin) / denom;
    if (t < ray.t_min || t > ray.t_max) continue;
    const Vec3 p = ray.at(t);
    const double area = dot(n, n);
    const double wa = dot(cross(b - p, c - p), n) / area;
    const double wb = dot(cross(c - p, a - p), n) / area;
    const double wc = 1.0 - wa - wb;
    if (wa < -1e-12 || wb < -1e-12 || wc < -1e-12) continue;
    if (!best || t < best->first) best = {{t, i}};
  }
  return best;
}

Ray random_ray(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Ray r;
  r.origin = Vec3{u(rng), u(rng), u(rng)} * 2.5;
  Vec3 target{u(rng) * 0.8, u(rng) * 0.8, u(rng) * 0.8};
  r.direction = normalize(target - r.origin);
  return r;
}

TriangleMesh single(const Vec3& a, const Vec3& b, const Vec3& c) {
  TriangleMesh m;
  m.vertices = {a, b, c};
  m.triangles = {{0, 1, 2}};
  return m;
}

void check_leaves(const Bvh& bvh, const TriangleMesh& mesh) {
  std::vector<int> seen(mesh.triangles.size(), 0);
  for (const auto& node : bvh.nodes) {
    if (!node.is_leaf()) continue;
    CHECK(node.count <= kBvhMaxLeafSize);
    for (std::uint32_t k = 0; k < node.count; ++k) {
      const auto tri = bvh.order[node.first + k];
      ++seen[tri];
      for (const auto& v : mesh.corners(tri)) CHECK(node.box.contains(v));
    }
  }
  for (int s : seen) CHECK(s == 1);
}

}  // namespace

TEST_CASE("single triangle gives a one-leaf tree with the triangle's box") {
  const auto mesh = single({0, 0, 1}, {2, 0, 1}, {0, 3, 2});
  const Bvh bvh = build_bvh(mesh);
  REQUIRE(bvh.nodes.size() == 1);
  CHECK(bvh.nodes[0].is_leaf());
  CHECK(bvh.nodes[0].box.lo == Vec3{0, 0, 1});
  CHECK(bvh.nodes[0].box.hi == Vec3{2, 3, 2});
}

TEST_CASE("root box is the union of two distant triangles") {
  auto mesh = merge(single({0, 0, 0}, {1, 0, 0}, {0, 1, 0}), single({100, 100, 100}, {101, 100, 100}, {100, 101, 101}));
  const Bvh bvh = build_bvh(mesh);
  CHECK(bvh.nodes[0].box.lo == Vec3{0, 0, 0});
  CHECK(bvh.nodes[0].box.hi == Vec3{101, 101, 101});
  check_leaves(bvh, mesh);
}

TEST_CASE("empty mesh is rejected") {
  TriangleMesh mesh;
  CHECK_THROWS_AS(build_bvh(mesh), Error);
}

TEST_CASE("axis-aligned hit and miss") {
  Ray ray{{0, 0, 0}, {0, 0, 1}};
  auto mesh = single({-1, -1, 1}, {1, -1, 1}, {0, 1, 1});
  auto hit = intersect(build_bvh(mesh), mesh, ray);
  REQUIRE(hit);
  CHECK(hit->t == doctest::Approx(1.0).epsilon(1e-12));

  auto moved = single({5, -1, 1}, {6, -1, 1}, {5.5, 1, 1});
  CHECK_FALSE(intersect(build_bvh(moved), moved, ray));
}

TEST_CASE("backfaces are reported") {
  Ray ray{{0, 0, 0}, {0, 0, 1}};
  auto front = single({-1, -1, 1}, {1, -1, 1}, {0, 1, 1});
  auto back = single({-1, -1, 1}, {0, 1, 1}, {1, -1, 1});
  CHECK(intersect(build_bvh(front), front, ray));
  CHECK(intersect(build_bvh(back), back, ray));
}

TEST_CASE("coincident triangles resolve to the lowest id") {
  auto a = single({-1, -1, 1}, {1, -1, 1}, {0, 1, 1});
  auto mesh = merge(merge(a, a), a);
  Ray ray{{0, 0, 0}, {0, 0, 1}};
  auto hit = intersect(build_bvh(mesh), mesh, ray);
  REQUIRE(hit);
  CHECK(hit->triangle_id == 0);
}

TEST_CASE("BVH nearest hit equals the brute-force scan") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto mesh = test::random_mesh(500, seed);
    const Bvh bvh = build_bvh(mesh);
    check_leaves(bvh, mesh);
    std::mt19937_64 rng(seed * 77);
    for (int i = 0; i < 1000; ++i) {
      const Ray ray = random_ray(rng);
      const auto got = intersect(bvh, mesh, ray);
      const auto want = brute_force(mesh, ray);
      REQUIRE(got.has_value() == want.has_value());
      if (!got) continue;
      CHECK(std::abs(got->t - want->first) <= 1e-6 * want->first);
      if (got->triangle_id != want->second) {
        // Only acceptable for a genuine tie in t.
        CHECK(std::abs(got->t - want->first) <= 1e-9 * want->first);
      }
      CHECK(got->u >= -1e-6);
      CHECK(got->v >= -1e-6);
      CHECK(got->u + got->v <= 1.0 + 1e-6);
    }
  }
}

TEST_CASE("shrinking t_max below the hit turns it into a miss") {
  const auto mesh = test::random_mesh(200, 9);
  const Bvh bvh = build_bvh(mesh);
  std::mt19937_64 rng(4);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    Ray ray = random_ray(rng);
    const auto hit = intersect(bvh, mesh, ray);
    if (!hit) continue;
    ray.t_max = hit->t * (1.0 - 1e-9);
    const auto shorter = intersect(bvh, mesh, ray);
    CHECK_FALSE(shorter);
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("icosphere BVH covers every triangle once") {
  const auto mesh = make_icosphere(3);
  CHECK(mesh.triangles.size() == 1280);
  check_leaves(build_bvh(mesh), mesh);
}

TEST_CASE("scalar interpolation") {
  auto mesh = single({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  mesh.scalar_fields["c"] = {5, 5, 5};
  mesh.scalar_fields["v"] = {0, 1, 0};
  mesh.scalar_fields["w"] = {0, 0, 3};
  CHECK(interpolate_scalar(mesh, Hit{1, 0, 0.3, 0.2}, "c") == doctest::Approx(5.0));
  CHECK(interpolate_scalar(mesh, Hit{1, 0, 1.0, 0.0}, "v") == doctest::Approx(1.0));
  CHECK(interpolate_scalar(mesh, Hit{1, 0, 1.0 / 3.0, 1.0 / 3.0}, "w") == doctest::Approx(1.0));
  try {
    interpolate_scalar(mesh, Hit{}, "missing");
    FAIL("expected a lookup error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Lookup);
  }
}

TEST_CASE("mesh validation") {
  auto mesh = single({0, 0, 0}, {1, 0, 0}, {0, 1, 0});
  mesh.validate();
  mesh.triangles.push_back({0, 1, 3});
  CHECK_THROWS_AS(mesh.validate(), Error);
  mesh.triangles.pop_back();
  mesh.scalar_fields["short"] = {1, 2};
  CHECK_THROWS_AS(mesh.validate(), Error);
}

TEST_CASE("OBJ subset parsing") {
  std::istringstream in(
      "# quad\n"
      "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n"
      "vn 0 0 1\n"
      "f 1/1/1 2//1 3 4\n"
      "f -1 -2 -3\n");
  const auto mesh = parse_obj(in);
  CHECK(mesh.vertices.size() == 4);
  REQUIRE(mesh.triangles.size() == 3);
  CHECK(mesh.triangles[0] == Triangle{0, 1, 2});
  CHECK(mesh.triangles[1] == Triangle{0, 2, 3});
  CHECK(mesh.triangles[2] == Triangle{3, 2, 1});
}

TEST_CASE("OBJ errors carry the line number") {
  std::istringstream in("v 0 0 0\nv 1 0 0\nf 1 2 9\n");
  try {
    parse_obj(in, "bad.obj");
    FAIL("expected a parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("3") != std::string::npos);
  }
  CHECK_THROWS_AS(read_obj("/nonexistent/mesh.obj"), Error);
}

TEST_CASE("OBJ and fields round trip through files") {
  test::TempDir dir("geom");
  const auto torus = make_torus(1.0, 0.3, 16, 8);
  write_obj(dir / "t.obj", torus);
  write_fields_json(dir / "t.json", torus);
  auto back = read_obj(dir / "t.obj");
  read_fields_json(dir / "t.json", back);
  CHECK(back.vertices == torus.vertices);
  CHECK(back.triangles == torus.triangles);
  CHECK(back.scalar_fields == torus.scalar_fields);
}

TEST_CASE("torus has the documented size and fields") {
  const auto torus = make_torus(1.0, 0.35, 64, 32);
  CHECK(torus.triangles.size() == 4096);
  CHECK(torus.scalar_fields.contains("height"));
  CHECK(torus.scalar_fields.contains("angle"));
  torus.validate();
}
