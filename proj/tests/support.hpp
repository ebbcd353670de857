#pragma once

#include "darkroom/camera.hpp"
#include "darkroom/geometry.hpp"
#include "darkroom/imaging.hpp"
#include "darkroom/passes.hpp"

#include <chrono>
#include <filesystem>
#include <random>
#include <string>

namespace test {

namespace fs = std::filesystem;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "t") {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("darkroom-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& child) const { return path_ / child; }

 private:
  fs::path path_;
};

// n small triangles scattered in the unit cube.
inline darkroom::TriangleMesh random_mesh(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  std::uniform_real_distribution<double> off(-0.2, 0.2);
  darkroom::TriangleMesh mesh;
  for (int i = 0; i < n; ++i) {
    const darkroom::Vec3 c{pos(rng), pos(rng), pos(rng)};
    const auto base = static_cast<std::uint32_t>(mesh.vertices.size());
    for (int k = 0; k < 3; ++k) mesh.vertices.push_back(c + darkroom::Vec3{off(rng), off(rng), off(rng)});
    mesh.triangles.push_back({base, base + 1, base + 2});
  }
  return mesh;
}

inline darkroom::Camera look_at(darkroom::Vec3 position, darkroom::Vec3 target, darkroom::Vec3 up, int w, int h,
                                darkroom::Projection projection = darkroom::Projection::perspective(45.0)) {
  darkroom::Camera c;
  c.position = position;
  c.target = target;
  c.up = up;
  c.width = w;
  c.height = h;
  c.projection = projection;
  return c;
}

inline darkroom::RgbaImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  darkroom::RgbaImage img(w, h);
  for (auto& p : img.pixels) p = {u(rng), u(rng), u(rng), u(rng)};
  return img;
}

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace test
