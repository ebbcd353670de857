#include "darkroom/error.hpp"
#include "darkroom/passes.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace darkroom {

void ColorMap::validate() const {
  if (stops.size() < 2) throw Error(ErrorCode::InvalidArgument, "color map needs at least two stops");
  if (stops.front().position != 0.0 || stops.back().position != 1.0) {
    throw Error(ErrorCode::InvalidArgument, "color map must start at 0 and end at 1");
  }
  for (std::size_t i = 1; i < stops.size(); ++i) {
    if (!(stops[i].position > stops[i - 1].position)) {
      throw Error(ErrorCode::InvalidArgument, "color map stops must be strictly increasing");
    }
  }
}

Rgba ColorMap::lookup(double t) const {
  t = std::clamp(t, 0.0, 1.0);
  auto upper = std::upper_bound(stops.begin(), stops.end(), t,
                                [](double value, const ColorStop& s) { return value < s.position; });
  if (upper == stops.end()) return {stops.back().r, stops.back().g, stops.back().b, 1.0f};
  if (upper == stops.begin()) return {stops.front().r, stops.front().g, stops.front().b, 1.0f};
  const auto& a = *(upper - 1);
  const auto& b = *upper;
  const double f = (t - a.position) / (b.position - a.position);
  auto mix = [f](float x, float y) { return static_cast<float>(x + (y - x) * f); };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b), 1.0f};
}

ColorMap ColorMap::preset(const std::string& name) {
  if (name == "grayscale") return {{{0.0, 0, 0, 0}, {1.0, 1, 1, 1}}, {0, 0, 0, 0}};
  if (name == "viridis") {
    return {{{0.0, 0.267f, 0.005f, 0.329f},
             {0.25, 0.229f, 0.322f, 0.546f},
             {0.5, 0.128f, 0.567f, 0.551f},
             {0.75, 0.369f, 0.789f, 0.383f},
             {1.0, 0.993f, 0.906f, 0.144f}},
            {0, 0, 0, 0}};
  }
  if (name == "inferno") {
    return {{{0.0, 0.001f, 0.000f, 0.014f},
             {0.25, 0.341f, 0.062f, 0.429f},
             {0.5, 0.735f, 0.216f, 0.330f},
             {0.75, 0.988f, 0.645f, 0.040f},
             {1.0, 0.988f, 1.000f, 0.645f}},
            {0, 0, 0, 0}};
  }
  if (name == "cool_warm") {
    return {{{0.0, 0.230f, 0.299f, 0.754f}, {0.5, 0.865f, 0.865f, 0.865f}, {1.0, 0.706f, 0.016f, 0.150f}},
            {0, 0, 0, 0}};
  }
  throw Error(ErrorCode::Lookup, "unknown color map '" + name + "'", {{"colormap", name}});
}

std::vector<std::string> ColorMap::preset_names() { return {"viridis", "inferno", "cool_warm", "grayscale"}; }

RgbaImage color_map(const Plane& scalar, double lo, double hi, const ColorMap& map, Exec exec) {
  if (!(lo < hi)) throw Error(ErrorCode::InvalidArgument, "color map range needs lo < hi");
  map.validate();
  RgbaImage out(scalar.width, scalar.height);
  const double scale = 1.0 / (hi - lo);
  for_rows(scalar.height, exec, [&](int y) {
    for (int x = 0; x < scalar.width; ++x) {
      const float v = scalar(x, y);
      out(x, y) = std::isnan(v) ? map.nan_color : map.lookup((v - lo) * scale);
    }
  });
  return out;
}

Layer composite(std::span<const Layer> layers, Exec exec) {
  if (layers.empty()) throw Error(ErrorCode::InvalidArgument, "composite needs at least one layer");
  const int w = layers.front().depth.width;
  const int h = layers.front().depth.height;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (l.depth.width != w || l.depth.height != h || !l.image.same_size(l.depth)) {
      throw Error(ErrorCode::InvalidArgument, "composite layer " + std::to_string(i) + " differs in resolution",
                  {{"layer", i}});
    }
  }
  Layer out{Plane(w, h, std::numeric_limits<float>::infinity()), RgbaImage(w, h)};
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      for (const auto& l : layers) {
        const float d = l.depth(x, y);
        if (d < out.depth(x, y)) {
          out.depth(x, y) = d;
          out.image(x, y) = l.image(x, y);
        }
      }
    }
  });
  return out;
}

RgbaImage modulate(const RgbaImage& image, const Plane& mask, const ModulateMode& mode, Exec exec) {
  if (!image.same_size(mask)) throw Error(ErrorCode::InvalidArgument, "modulate: mask resolution differs");
  RgbaImage out = image;
  for_rows(image.height, exec, [&](int y) {
    for (int x = 0; x < image.width; ++x) {
      const float m = std::isnan(mask(x, y)) ? 0.0f : std::clamp(mask(x, y), 0.0f, 1.0f);
      auto& px = out(x, y);
      if (mode.kind == ModulateMode::Kind::MultiplyDarken) {
        const float keep = 1.0f - m;
        px.r *= keep;
        px.g *= keep;
        px.b *= keep;
      } else {
        px.r += (mode.color.r - px.r) * m;
        px.g += (mode.color.g - px.g) * m;
        px.b += (mode.color.b - px.b) * m;
      }
    }
  });
  return out;
}

Plane combine_masks(const Plane& a, const Plane& b) {
  if (!a.same_size(b)) throw Error(ErrorCode::InvalidArgument, "combine_masks: resolution differs");
  Plane out(a.width, a.height);
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const float ma = std::isnan(a.data[i]) ? 0.0f : a.data[i];
    const float mb = std::isnan(b.data[i]) ? 0.0f : b.data[i];
    out.data[i] = 1.0f - (1.0f - ma) * (1.0f - mb);
  }
  return out;
}

}  // namespace darkroom
