#include "darkroom/primitives.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <utility>

namespace darkroom {

TriangleMesh make_icosphere(int subdivisions, double radius, const Vec3& center) {
  const double phi = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> unit = {{-1, phi, 0}, {1, phi, 0},  {-1, -phi, 0}, {1, -phi, 0},
                            {0, -1, phi}, {0, 1, phi},  {0, -1, -phi}, {0, 1, -phi},
                            {phi, 0, -1}, {phi, 0, 1},  {-phi, 0, -1}, {-phi, 0, 1}};
  for (auto& v : unit) v = normalize(v);
  std::vector<Triangle> faces = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                 {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                 {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                 {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};

  for (int level = 0; level < subdivisions; ++level) {
    std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> midpoints;
    auto midpoint = [&](std::uint32_t a, std::uint32_t b) {
      const auto key = std::minmax(a, b);
      auto it = midpoints.find(key);
      if (it != midpoints.end()) return it->second;
      unit.push_back(normalize((unit[a] + unit[b]) * 0.5));
      const auto idx = static_cast<std::uint32_t>(unit.size() - 1);
      midpoints.emplace(key, idx);
      return idx;
    };
    std::vector<Triangle> refined;
    refined.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const auto ab = midpoint(f[0], f[1]);
      const auto bc = midpoint(f[1], f[2]);
      const auto ca = midpoint(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces = std::move(refined);
  }

  TriangleMesh mesh;
  mesh.vertices.reserve(unit.size());
  for (const auto& v : unit) mesh.vertices.push_back(center + v * radius);
  mesh.triangles = std::move(faces);
  return mesh;
}

TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments) {
  TriangleMesh mesh;
  auto& height = mesh.scalar_fields["height"];
  auto& angle = mesh.scalar_fields["angle"];
  const double two_pi = 2.0 * std::numbers::pi;
  for (int i = 0; i < major_segments; ++i) {
    const double a = two_pi * i / major_segments;
    for (int j = 0; j < minor_segments; ++j) {
      const double b = two_pi * j / minor_segments;
      const double ring = major_radius + minor_radius * std::cos(b);
      mesh.vertices.push_back({ring * std::cos(a), minor_radius * std::sin(b), ring * std::sin(a)});
      height.push_back(static_cast<float>(minor_radius * std::sin(b)));
      angle.push_back(static_cast<float>(static_cast<double>(i) / major_segments));
    }
  }
  auto index = [&](int i, int j) {
    return static_cast<std::uint32_t>((i % major_segments) * minor_segments + (j % minor_segments));
  };
  for (int i = 0; i < major_segments; ++i) {
    for (int j = 0; j < minor_segments; ++j) {
      mesh.triangles.push_back({index(i, j), index(i + 1, j), index(i + 1, j + 1)});
      mesh.triangles.push_back({index(i, j), index(i + 1, j + 1), index(i, j + 1)});
    }
  }
  return mesh;
}

TriangleMesh make_quad(const Vec3& corner, const Vec3& edge_u, const Vec3& edge_v, int cells) {
  TriangleMesh mesh;
  for (int j = 0; j <= cells; ++j) {
    for (int i = 0; i <= cells; ++i) {
      mesh.vertices.push_back(corner + edge_u * (static_cast<double>(i) / cells) +
                              edge_v * (static_cast<double>(j) / cells));
    }
  }
  auto index = [&](int i, int j) { return static_cast<std::uint32_t>(j * (cells + 1) + i); };
  for (int j = 0; j < cells; ++j) {
    for (int i = 0; i < cells; ++i) {
      mesh.triangles.push_back({index(i, j), index(i + 1, j), index(i + 1, j + 1)});
      mesh.triangles.push_back({index(i, j), index(i + 1, j + 1), index(i, j + 1)});
    }
  }
  return mesh;
}

TriangleMesh merge(const TriangleMesh& a, const TriangleMesh& b) {
  TriangleMesh out;
  out.vertices = a.vertices;
  out.vertices.insert(out.vertices.end(), b.vertices.begin(), b.vertices.end());
  out.triangles = a.triangles;
  const auto offset = static_cast<std::uint32_t>(a.vertices.size());
  for (auto t : b.triangles) out.triangles.push_back({t[0] + offset, t[1] + offset, t[2] + offset});
  for (const auto& [name, values] : a.scalar_fields) {
    auto other = b.scalar_fields.find(name);
    if (other == b.scalar_fields.end()) continue;
    auto& merged = out.scalar_fields[name];
    merged = values;
    merged.insert(merged.end(), other->second.begin(), other->second.end());
  }
  return out;
}

}  // namespace darkroom
