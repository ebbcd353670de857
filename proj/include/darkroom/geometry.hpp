#pragma once

#include "darkroom/vec3.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace darkroom {

using Triangle = std::array<std::uint32_t, 3>;

// Indexed triangle surface with named per-vertex scalar fields.
struct TriangleMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::map<std::string, std::vector<float>> scalar_fields;

  // Throws Error(InvalidArgument) when an index or field length is off, or
  // the mesh has no triangles.
  void validate() const;

  std::array<Vec3, 3> corners(std::size_t triangle) const {
    const auto& t = triangles[triangle];
    return {vertices[t[0]], vertices[t[1]], vertices[t[2]]};
  }
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
  double t_min = 0.0;
  double t_max = std::numeric_limits<double>::infinity();

  Vec3 at(double t) const { return origin + direction * t; }
};

struct Hit {
  double t = 0.0;
  std::uint32_t triangle_id = 0;
  double u = 0.0;  // weight of the second vertex
  double v = 0.0;  // weight of the third vertex

  double w() const { return 1.0 - u - v; }
};

struct Aabb {
  Vec3 lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
          std::numeric_limits<double>::infinity()};
  Vec3 hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
          -std::numeric_limits<double>::infinity()};

  void grow(const Vec3& p) {
    lo = min(lo, p);
    hi = max(hi, p);
  }
  void grow(const Aabb& b) {
    lo = min(lo, b.lo);
    hi = max(hi, b.hi);
  }
  bool empty() const { return lo.x > hi.x; }
  bool contains(const Vec3& p) const {
    return p.x >= lo.x && p.y >= lo.y && p.z >= lo.z && p.x <= hi.x && p.y <= hi.y && p.z <= hi.z;
  }
  Vec3 center() const { return (lo + hi) * 0.5; }
  double surface_area() const {
    if (empty()) return 0.0;
    const Vec3 d = hi - lo;
    return 2.0 * (d.x * d.y + d.y * d.z + d.z * d.x);
  }
  bool operator==(const Aabb&) const = default;
};

struct BvhNode {
  Aabb box;
  // Interior: children at `first` and `first + 1`, count == 0.
  // Leaf: triangles order[first .. first + count).
  std::uint32_t first = 0;
  std::uint32_t count = 0;

  bool is_leaf() const { return count > 0; }
};

struct Bvh {
  std::vector<BvhNode> nodes;  // nodes[0] is the root
  std::vector<std::uint32_t> order;
  std::uint32_t depth = 0;  // longest root-to-leaf path, in nodes
};

inline constexpr int kBvhBins = 16;
inline constexpr std::uint32_t kBvhMaxLeafSize = 4;

// Binned SAH build. Throws Error(InvalidArgument) for an invalid or empty mesh.
Bvh build_bvh(const TriangleMesh& mesh);

// Moller-Trumbore test, both faces, |det| > 1e-9. Returns t and barycentrics
// when the hit lies in [ray.t_min, ray.t_max].
std::optional<Hit> intersect_triangle(const Ray& ray, const std::array<Vec3, 3>& tri);

// Nearest hit; equal t resolves to the lowest triangle id.
std::optional<Hit> intersect(const Bvh& bvh, const TriangleMesh& mesh, const Ray& ray);

// Barycentric interpolation of a per-vertex field at a hit.
// Throws Error(Lookup) for an unknown field.
float interpolate_scalar(const TriangleMesh& mesh, const Hit& hit, const std::string& field);

Aabb bounds(const TriangleMesh& mesh);

}  // namespace darkroom
