#pragma once

#include "darkroom/camera.hpp"
#include "darkroom/parallel.hpp"
#include "darkroom/plane.hpp"

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace darkroom {

struct Rgba {
  float r = 0.0f;
  float g = 0.0f;
  float b = 0.0f;
  float a = 0.0f;
  bool operator==(const Rgba&) const = default;
};

// Interleaved float RGBA, values in [0, 1].
struct RgbaImage {
  int width = 0;
  int height = 0;
  std::vector<Rgba> pixels;

  RgbaImage() = default;
  RgbaImage(int w, int h, Rgba fill = {}) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  Rgba& operator()(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgba& operator()(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool same_size(const Plane& p) const { return width == p.width && height == p.height; }
};

struct ColorStop {
  double position;  // [0, 1]
  float r, g, b;
};

struct ColorMap {
  std::vector<ColorStop> stops;  // strictly increasing, first at 0, last at 1
  Rgba nan_color{0.0f, 0.0f, 0.0f, 0.0f};

  // Throws Error(InvalidArgument).
  void validate() const;
  Rgba lookup(double t) const;

  // "grayscale", "viridis", "inferno", "cool_warm". Throws Error(Lookup).
  static ColorMap preset(const std::string& name);
  static std::vector<std::string> preset_names();
};

// t = clamp((v - lo) / (hi - lo), 0, 1), piecewise-linear lookup, alpha 1.
// NaN pixels take the map's nan_color. Throws when lo >= hi.
RgbaImage color_map(const Plane& scalar, double lo, double hi, const ColorMap& map, Exec exec = Exec::Parallel);

struct Layer {
  Plane depth;
  RgbaImage image;
};

// Per pixel the layer with the smallest depth wins; ties go to the earlier
// layer. Pixels where every depth is +inf (or NaN) become +inf/transparent.
Layer composite(std::span<const Layer> layers, Exec exec = Exec::Parallel);

struct SsaoParams {
  double radius_pct = 1.0;  // of the image height
  int samples = 16;
  double bias = 0.025;      // fraction of the world radius
  std::uint64_t seed = 0;
  double strength = 1.0;    // [0, 4]

  void validate() const;
};

// Occlusion in [0, 1] (0 = open). Normal-oriented hemisphere sampling over
// positions and normals reconstructed from depth; background pixels get 0.
Plane ssao(const Plane& depth, const Camera& camera, const SsaoParams& params, Exec exec = Exec::Parallel);

// Frame min-max normalization of finite depths; background becomes 1 and a
// constant frame maps to 0.
Plane normalize_depth(const Plane& depth);

// Separable Gaussian, kernel truncated at 3 sigma, clamp-to-edge. Returns
// blur(v) - v, computed so that constant neighborhoods give exactly 0.
Plane gaussian_blur_delta(const Plane& values, double sigma, Exec exec = Exec::Parallel);

// Depth darkening: rgb += lambda * min(blur(D) - D, 0) on normalized depth.
RgbaImage ssdd(const Plane& depth, const RgbaImage& image, double sigma, double lambda, Exec exec = Exec::Parallel);

// Circle of confusion in pixels: clamp(aperture * |d - focal| / d, 0, max_radius).
double circle_of_confusion(float depth, double focal_depth, double aperture, double max_radius);

// Depth of field by scatter-aware disk gather: a neighbor at distance r
// contributes only if its own CoC reaches r. CoC < 0.5 px passes through.
RgbaImage ssdof(const RgbaImage& image, const Plane& depth, double focal_depth, double aperture, double max_radius,
                Exec exec = Exec::Parallel);

// Silhouette mask from normalized-depth discontinuities over the
// 8-neighborhood, dilated by `halfwidth` pixels and smoothstep-feathered.
Plane ibs(const Plane& depth, double threshold, int halfwidth, Exec exec = Exec::Parallel);

struct FxaaParams {
  double edge_threshold = 0.125;
  double edge_threshold_min = 0.0312;
  double subpixel = 0.75;
};

inline float luma(const Rgba& c) { return 0.299f * c.r + 0.587f * c.g + 0.114f * c.b; }

// Luma-driven edge anti-aliasing: contrast test, edge orientation, end-of-edge
// search (12 steps), sub-pixel blend. Alpha passes through.
RgbaImage fxaa(const RgbaImage& image, const FxaaParams& params = {}, Exec exec = Exec::Parallel);

struct ModulateMode {
  enum class Kind { MultiplyDarken, DrawColor };
  Kind kind = Kind::MultiplyDarken;
  Rgba color{0.0f, 0.0f, 0.0f, 1.0f};  // DrawColor only
};

// MultiplyDarken: rgb * (1 - m). DrawColor: mix(rgb, color, m). Alpha kept.
// NaN mask values count as 0.
RgbaImage modulate(const RgbaImage& image, const Plane& mask, const ModulateMode& mode, Exec exec = Exec::Parallel);

// 1 - (1 - a)(1 - b)
Plane combine_masks(const Plane& a, const Plane& b);

}  // namespace darkroom
