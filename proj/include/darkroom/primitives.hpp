#pragma once

#include "darkroom/geometry.hpp"

namespace darkroom {

// Unit-radius icosahedron refined `subdivisions` times, projected onto the
// sphere of `radius` about `center`. 20 * 4^subdivisions triangles.
TriangleMesh make_icosphere(int subdivisions, double radius = 1.0, const Vec3& center = {});

// Torus around the y axis; 2 * major_segments * minor_segments triangles.
// Adds per-vertex fields "height" (y) and "angle" (major angle in [0, 1)).
TriangleMesh make_torus(double major_radius, double minor_radius, int major_segments, int minor_segments);

// Axis-aligned rectangle spanned by corner + s*edge_u + t*edge_v, split into
// 2 * cells * cells triangles.
TriangleMesh make_quad(const Vec3& corner, const Vec3& edge_u, const Vec3& edge_v, int cells = 1);

// Appends b to a; fields present in both are concatenated, others dropped.
TriangleMesh merge(const TriangleMesh& a, const TriangleMesh& b);

}  // namespace darkroom
