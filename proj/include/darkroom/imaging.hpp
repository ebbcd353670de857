#pragma once

#include "darkroom/camera.hpp"
#include "darkroom/geometry.hpp"
#include "darkroom/parallel.hpp"
#include "darkroom/plane.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace darkroom {

struct Channel {
  std::string name;
  std::vector<Plane> planes;
};

// Fixed-resolution stack of named float channels.
//
//   depth           1 plane, distance camera -> hit, background +inf
//   scalar:<field>  1 plane, background NaN
//   position        3 planes, world units, background NaN
//   normal          3 planes, unit vectors facing the camera, background NaN
class GBuffer {
 public:
  GBuffer() = default;
  GBuffer(int width, int height, Camera camera) : width_(width), height_(height), camera_(std::move(camera)) {}

  int width() const { return width_; }
  int height() const { return height_; }
  const Camera& camera() const { return camera_; }
  void set_camera(const Camera& camera) { camera_ = camera; }

  // Replaces a channel of the same name. Throws on resolution mismatch.
  void set_channel(std::string name, std::vector<Plane> planes);
  bool has(const std::string& name) const;
  // Throws Error(MissingChannel).
  const Channel& channel(const std::string& name) const;
  const Plane& plane(const std::string& name, int index = 0) const { return channel(name).planes.at(index); }
  const std::vector<Channel>& channels() const { return channels_; }

 private:
  int width_ = 0;
  int height_ = 0;
  Camera camera_;
  std::vector<Channel> channels_;
};

inline std::string scalar_channel_name(const std::string& field) { return "scalar:" + field; }

struct RenderOptions {
  bool emit_position = false;
  bool emit_normal = false;
  // Without a seed every pixel is sampled at its center.
  std::optional<std::uint64_t> jitter_seed;
  Exec exec = Exec::Parallel;
};

// One primary ray per pixel. Throws Error(Lookup) for an unknown field.
GBuffer render_gbuffer(const TriangleMesh& mesh, const Bvh& bvh, const Camera& camera,
                       const std::vector<std::string>& fields, const RenderOptions& options = {});

// World positions from depth by walking each pixel-center ray to its depth.
// Background becomes a NaN triple.
std::vector<Plane> reconstruct_positions(const Plane& depth, const Camera& camera, Exec exec = Exec::Parallel);

// Normals from position differences, oriented toward the camera. Central
// differences where both neighbors are finite; a side whose depth step
// exceeds 10x the local median step is dropped in favor of the other.
// NaN where a pixel lacks a finite neighbor along either axis.
std::vector<Plane> reconstruct_normals(const std::vector<Plane>& positions, const Camera& camera,
                                       Exec exec = Exec::Parallel);

inline Vec3 read_vec3(const std::vector<Plane>& planes, int x, int y) {
  return {planes[0](x, y), planes[1](x, y), planes[2](x, y)};
}

}  // namespace darkroom
