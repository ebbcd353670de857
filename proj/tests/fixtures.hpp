#pragma once

// Rendered scenes shared by the pass tests and the acceptance suite.

#include "darkroom/imaging.hpp"
#include "darkroom/primitives.hpp"
#include "support.hpp"

namespace test {

struct Scene {
  darkroom::Camera camera;
  darkroom::Plane depth;
};

inline Scene render_depth(const darkroom::TriangleMesh& mesh, const darkroom::Camera& camera) {
  const auto bvh = darkroom::build_bvh(mesh);
  return {camera, darkroom::render_gbuffer(mesh, bvh, camera, {}).plane("depth")};
}

// Plane z = 0, much larger than the view, seen head-on from distance 3.
inline Scene flat_plane(int size = 129) {
  using darkroom::Vec3;
  const auto mesh = darkroom::make_quad({-50, -50, 0}, {100, 0, 0}, {0, 100, 0}, 8);
  return render_depth(mesh, look_at({0, 0, 3}, {0, 0, 0}, {0, 1, 0}, size, size));
}

// Concave right-angle crease: half-planes {x = 0, y >= 0} and {y = 0, x >= 0}
// along z. The camera looks down the bisector so the crease projects onto
// the center column of an odd-width image.
inline Scene crease(int size = 129) {
  using darkroom::Vec3;
  auto wall_x = darkroom::make_quad({0, 0, -50}, {0, 50, 0}, {0, 0, 100}, 8);
  auto wall_y = darkroom::make_quad({0, 0, -50}, {50, 0, 0}, {0, 0, 100}, 8);
  return render_depth(darkroom::merge(wall_x, wall_y), look_at({3, 3, 0}, {0, 0, 0}, {0, 0, 1}, size, size));
}

// Floor z = 0 with a raised platform z = 0.5 over x >= 0: a concave corner
// along the base of the riser and a convex edge along its top.
inline Scene step(int size = 256) {
  using darkroom::Vec3;
  auto floor = darkroom::make_quad({-6, -6, 0}, {6, 0, 0}, {0, 12, 0}, 8);
  auto riser = darkroom::make_quad({0, -6, 0}, {0, 12, 0}, {0, 0, 0.5}, 8);
  auto top = darkroom::make_quad({0, -6, 0.5}, {6, 0, 0}, {0, 12, 0}, 8);
  auto mesh = darkroom::merge(darkroom::merge(floor, riser), top);
  return render_depth(mesh, look_at({-3, 0.4, 3}, {0.2, 0, 0.25}, {0, 0, 1}, size, size));
}

}  // namespace test
