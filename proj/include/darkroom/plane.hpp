#pragma once

#include <cstddef>
#include <vector>

namespace darkroom {

// One float32 plane, row-major, pixel (0,0) top-left.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  Plane() = default;
  Plane(int w, int h, float fill = 0.0f)
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {}

  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
  }
  float& operator()(int x, int y) { return data[index(x, y)]; }
  float operator()(int x, int y) const { return data[index(x, y)]; }
  bool contains(int x, int y) const { return x >= 0 && y >= 0 && x < width && y < height; }
  bool same_size(const Plane& o) const { return width == o.width && height == o.height; }

  bool operator==(const Plane&) const = default;
};

}  // namespace darkroom
