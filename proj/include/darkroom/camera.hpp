#pragma once

#include "darkroom/geometry.hpp"
#include "darkroom/vec3.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace darkroom {

struct Projection {
  enum class Kind { Perspective, Orthographic };
  Kind kind = Kind::Perspective;
  double fov_y_deg = 45.0;   // perspective only
  double ortho_height = 1.0;  // orthographic only, world units

  static Projection perspective(double fov_y_deg) { return {Kind::Perspective, fov_y_deg, 1.0}; }
  static Projection orthographic(double height) { return {Kind::Orthographic, 45.0, height}; }
  bool is_perspective() const { return kind == Kind::Perspective; }
  bool operator==(const Projection&) const = default;
};

// Orthonormal view frame: forward points at the target, up is screen-up.
struct CameraBasis {
  Vec3 forward;
  Vec3 right;
  Vec3 up;
};

struct Camera {
  Vec3 position{0, 0, 1};
  Vec3 target{0, 0, 0};
  Vec3 up{0, 1, 0};
  Projection projection;
  int width = 1;
  int height = 1;

  // Throws Error(InvalidArgument) on a bad fov, resolution, or position == target.
  void validate() const;

  // Falls back to +x as the up hint when |forward . up| > 1 - 1e-6.
  CameraBasis basis() const;

  // Half extents of the image plane at unit distance (perspective) or in
  // world units (orthographic).
  double half_height() const;
  double half_width() const { return half_height() * width / height; }

  // World size of one pixel at view-axis distance `axial_depth`.
  double world_per_pixel(double axial_depth) const;

  bool operator==(const Camera&) const = default;
};

// Pixel (0,0) is the top-left; +x right, +y down. jitter in [0,1)^2 places
// the sample inside the pixel, (0.5, 0.5) is the center.
Ray generate_ray(const Camera& camera, int x, int y, double jitter_x = 0.5, double jitter_y = 0.5);

// Continuous pixel coordinates of a world point (pixel centers at +0.5), or
// nothing when it lies behind a perspective camera.
std::optional<std::pair<double, double>> project(const Camera& camera, const CameraBasis& basis, const Vec3& p);

// Depth convention shared by rendering and reconstruction: Euclidean distance
// for perspective, view-axis distance for orthographic.
double depth_of(const Camera& camera, const CameraBasis& basis, const Vec3& p);

struct GridAxis {
  std::string name;
  std::vector<double> values;  // one per camera
  bool operator==(const GridAxis&) const = default;
};

struct SamplingGrid {
  std::vector<Camera> cameras;
  std::vector<GridAxis> axes;

  // All cameras share resolution; every axis has one value per camera.
  void validate() const;
  std::size_t size() const { return cameras.size(); }
};

// Everything but the position, shared by all cameras of a grid.
struct Calibration {
  Vec3 target{0, 0, 0};
  Vec3 up{0, 1, 0};
  Projection projection;
  int width = 256;
  int height = 256;
};

// n cameras on a Fibonacci spiral; axes phi (azimuth, [0,360)) and theta
// (elevation, [-90,90]) in degrees. Each camera targets `center`.
SamplingGrid fibonacci_sphere_grid(const Vec3& center, double radius, int n, int width, int height,
                                   const Projection& projection = {});

struct ManualEntry {
  Vec3 position;
  std::vector<std::pair<std::string, double>> axis_values;
};

// One camera per entry; every entry must name the same axes in the same order.
SamplingGrid manual_grid(const std::vector<ManualEntry>& entries, const Calibration& calibration);

// Grid description file, see docs/formats.md.
SamplingGrid grid_from_json(const nlohmann::ordered_json& doc);

nlohmann::json camera_to_json(const Camera& camera);
Camera camera_from_json(const nlohmann::json& doc);

}  // namespace darkroom
