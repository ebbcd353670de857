#include "darkroom/error.hpp"
#include "darkroom/passes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace darkroom {

namespace {

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

std::vector<double> gaussian_weights(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> w(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    w[static_cast<std::size_t>(k + radius)] = std::exp(-0.5 * k * k / (sigma * sigma));
    sum += w[static_cast<std::size_t>(k + radius)];
  }
  for (auto& v : w) v /= sum;
  return w;
}

}  // namespace

Plane normalize_depth(const Plane& depth) {
  float lo = std::numeric_limits<float>::infinity();
  float hi = -std::numeric_limits<float>::infinity();
  for (float d : depth.data) {
    if (!std::isfinite(d)) continue;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  Plane out(depth.width, depth.height, 1.0f);
  const double span = static_cast<double>(hi) - lo;
  for (std::size_t i = 0; i < depth.data.size(); ++i) {
    const float d = depth.data[i];
    if (!std::isfinite(d)) continue;
    out.data[i] = span > 0.0 ? static_cast<float>((d - lo) / span) : 0.0f;
  }
  return out;
}

Plane gaussian_blur_delta(const Plane& values, double sigma, Exec exec) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::OutOfRange, "blur sigma must be > 0");
  const auto weights = gaussian_weights(sigma);
  const int radius = static_cast<int>(weights.size() / 2);
  const int w = values.width;
  const int h = values.height;

  // Each pass sums weighted differences to the center value, so a constant
  // neighborhood yields exactly zero.
  Plane delta_h(w, h);
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double center = values(x, y);
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sx = std::clamp(x + k, 0, w - 1);
        acc += weights[static_cast<std::size_t>(k + radius)] * (values(sx, y) - center);
      }
      delta_h(x, y) = static_cast<float>(acc);
    }
  });

  Plane delta(w, h);
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double center = static_cast<double>(values(x, y)) + delta_h(x, y);
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        const int sy = std::clamp(y + k, 0, h - 1);
        const double sample = static_cast<double>(values(x, sy)) + delta_h(x, sy);
        acc += weights[static_cast<std::size_t>(k + radius)] * (sample - center);
      }
      delta(x, y) = static_cast<float>(acc + delta_h(x, y));
    }
  });
  return delta;
}

RgbaImage ssdd(const Plane& depth, const RgbaImage& image, double sigma, double lambda, Exec exec) {
  if (!image.same_size(depth)) throw Error(ErrorCode::InvalidArgument, "ssdd: depth and image differ in resolution");
  const Plane normalized = normalize_depth(depth);
  const Plane delta = gaussian_blur_delta(normalized, sigma, exec);
  RgbaImage out = image;
  for_rows(image.height, exec, [&](int y) {
    for (int x = 0; x < image.width; ++x) {
      const float darken = static_cast<float>(lambda * std::min(delta(x, y), 0.0f));
      auto& px = out(x, y);
      px.r = std::clamp(px.r + darken, 0.0f, 1.0f);
      px.g = std::clamp(px.g + darken, 0.0f, 1.0f);
      px.b = std::clamp(px.b + darken, 0.0f, 1.0f);
    }
  });
  return out;
}

double circle_of_confusion(float depth, double focal_depth, double aperture, double max_radius) {
  if (std::isinf(depth)) return std::clamp(aperture, 0.0, max_radius);
  if (!(depth > 0.0f)) return 0.0;
  return std::clamp(aperture * std::abs(depth - focal_depth) / depth, 0.0, max_radius);
}

RgbaImage ssdof(const RgbaImage& image, const Plane& depth, double focal_depth, double aperture, double max_radius,
                Exec exec) {
  if (!image.same_size(depth)) throw Error(ErrorCode::InvalidArgument, "ssdof: depth and image differ in resolution");
  if (!(focal_depth > 0.0)) throw Error(ErrorCode::OutOfRange, "ssdof focal_depth must be > 0");
  if (aperture < 0.0) throw Error(ErrorCode::OutOfRange, "ssdof aperture must be >= 0");
  const int w = image.width;
  const int h = image.height;

  Plane coc(w, h);
  for (std::size_t i = 0; i < coc.data.size(); ++i) {
    coc.data[i] = static_cast<float>(circle_of_confusion(depth.data[i], focal_depth, aperture, max_radius));
  }

  RgbaImage out = image;
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const double c = coc(x, y);
      if (c < 0.5) continue;
      const int reach = static_cast<int>(std::floor(c));
      double r = 0.0, g = 0.0, b = 0.0, a = 0.0, weight = 0.0;
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          const int sx = x + dx;
          const int sy = y + dy;
          if (!depth.contains(sx, sy)) continue;
          const double dist = std::sqrt(static_cast<double>(dx * dx + dy * dy));
          if (dist > c) continue;
          if (dist > 0.0 && coc(sx, sy) < dist) continue;
          const auto& px = image(sx, sy);
          r += px.r;
          g += px.g;
          b += px.b;
          a += px.a;
          weight += 1.0;
        }
      }
      const double inv = 1.0 / weight;
      out(x, y) = {static_cast<float>(r * inv), static_cast<float>(g * inv), static_cast<float>(b * inv),
                   static_cast<float>(a * inv)};
    }
  });
  return out;
}

Plane ibs(const Plane& depth, double threshold, int halfwidth, Exec exec) {
  if (!(threshold > 0.0)) throw Error(ErrorCode::OutOfRange, "ibs threshold must be > 0");
  if (halfwidth < 0) throw Error(ErrorCode::OutOfRange, "ibs halfwidth must be >= 0");
  const int w = depth.width;
  const int h = depth.height;
  const Plane normalized = normalize_depth(depth);

  std::vector<std::uint8_t> edge(static_cast<std::size_t>(w) * h, 0);
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const bool background = !std::isfinite(depth(x, y));
      double strength = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !depth.contains(x + dx, y + dy)) continue;
          if (background && !std::isfinite(depth(x + dx, y + dy))) continue;
          strength = std::max(strength, static_cast<double>(std::abs(normalized(x, y) - normalized(x + dx, y + dy))));
        }
      }
      if (strength > threshold) edge[static_cast<std::size_t>(y) * w + x] = 1;
    }
  });

  Plane mask(w, h, 0.0f);
  const int reach = halfwidth + 1;
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double nearest = std::numeric_limits<double>::infinity();
      for (int dy = -reach; dy <= reach; ++dy) {
        for (int dx = -reach; dx <= reach; ++dx) {
          const int sx = x + dx;
          const int sy = y + dy;
          if (!depth.contains(sx, sy) || edge[static_cast<std::size_t>(sy) * w + sx] == 0) continue;
          nearest = std::min(nearest, std::sqrt(static_cast<double>(dx * dx + dy * dy)));
        }
      }
      if (std::isfinite(nearest)) {
        mask(x, y) = static_cast<float>(1.0 - smoothstep(halfwidth, halfwidth + 1.0, nearest));
      }
    }
  });
  return mask;
}

}  // namespace darkroom
