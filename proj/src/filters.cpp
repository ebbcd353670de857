#include "darkroom/error.hpp"
#include "darkroom/registry.hpp"

#include <cmath>
#include <limits>

namespace darkroom {

namespace {

constexpr double kHuge = 1.0e9;

ParamSpec number(std::string name, double def, double lo, double hi, std::string description, double step = 0.0,
                 bool min_exclusive = false) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamSpec::Kind::Float;
  p.default_value = def;
  p.min = lo;
  p.max = hi;
  p.min_exclusive = min_exclusive;
  p.step = step;
  p.port = PortType::Number;
  p.description = std::move(description);
  return p;
}

ParamSpec integer(std::string name, double def, double lo, double hi, std::string description) {
  ParamSpec p = number(std::move(name), def, lo, hi, std::move(description), 1.0);
  p.kind = ParamSpec::Kind::Int;
  return p;
}

ParamSpec choice(std::string name, std::string def, std::vector<std::string> choices, std::string description) {
  ParamSpec p;
  p.name = std::move(name);
  p.kind = ParamSpec::Kind::Enum;
  p.default_value = std::move(def);
  p.choices = std::move(choices);
  p.description = std::move(description);
  return p;
}

ValuePtr make(Value v) { return std::make_shared<const Value>(std::move(v)); }

const Camera& camera_of(const KernelArgs& args, const std::string& port) {
  const auto& ch = args.channel(port);
  if (!ch.camera) {
    throw Error(ErrorCode::TypeMismatch,
                "node '" + args.node() + "' input '" + port + "' needs a depth channel that carries a camera",
                {{"node", args.node()}, {"port", port}});
  }
  return *ch.camera;
}

void require_same_size(const KernelArgs& args, const Plane& plane, const RgbaImage& image) {
  if (!image.same_size(plane)) {
    throw Error(ErrorCode::TypeMismatch, "node '" + args.node() + "' inputs differ in resolution",
                {{"node", args.node()}});
  }
}

FilterDef source_filter() {
  FilterDef f;
  f.name = "Source";
  f.description = "Selects one loaded G-buffer and exposes its depth and one named channel.";
  f.params = {integer("input", 0, 0, 15, "index of the loaded G-buffer"), ParamSpec{}};
  f.params[0].port.reset();
  f.params[1].name = "channel";
  f.params[1].kind = ParamSpec::Kind::Text;
  f.params[1].default_value = std::string("depth");
  f.params[1].description = "channel exposed on the 'channel' port, e.g. depth or scalar:height";
  f.outputs = {{"gbuffer", PortType::GBuffer}, {"depth", PortType::Channel}, {"channel", PortType::Channel}};
  f.kernel = [](const KernelArgs& args) {
    const auto index = static_cast<std::size_t>(args.number("input"));
    const auto& buffers = args.context().gbuffers;
    if (index >= buffers.size() || !buffers[index]) {
      throw Error(ErrorCode::MissingChannel,
                  "node '" + args.node() + "' selects G-buffer " + std::to_string(index) + " but only " +
                      std::to_string(buffers.size()) + " are loaded",
                  {{"node", args.node()}, {"input", index}});
    }
    const auto& gb = buffers[index];
    const std::string& name = args.text("channel");
    auto fetch = [&](const std::string& channel) -> const Plane& {
      if (!gb->has(channel)) {
        throw Error(ErrorCode::MissingChannel, "node '" + args.node() + "' requests missing channel '" + channel + "'",
                    {{"node", args.node()}, {"channel", channel}});
      }
      const auto& ch = gb->channel(channel);
      if (ch.planes.size() != 1) {
        throw Error(ErrorCode::TypeMismatch,
                    "node '" + args.node() + "' channel '" + channel + "' has " + std::to_string(ch.planes.size()) +
                        " planes; only single-plane channels can be exposed",
                    {{"node", args.node()}, {"channel", channel}});
      }
      return ch.planes[0];
    };
    PortValues out;
    out["gbuffer"] = make(gb);
    out["depth"] = make(ChannelValue{fetch("depth"), gb->camera()});
    out["channel"] = make(ChannelValue{fetch(name), gb->camera()});
    return out;
  };
  return f;
}

FilterDef color_mapping_filter() {
  FilterDef f;
  f.name = "ColorMapping";
  f.description = "Maps a scalar channel through a color map.";
  auto cmap = choice("colormap", "viridis", ColorMap::preset_names(), "preset color map");
  cmap.port = PortType::ColorMap;
  f.params = {number("lo", 0.0, -kHuge, kHuge, "scalar mapped to the first stop", 0.01),
              number("hi", 1.0, -kHuge, kHuge, "scalar mapped to the last stop", 0.01), cmap};
  f.inputs = {{"scalar", PortType::Channel}};
  f.outputs = {{"image", PortType::Image}};
  f.kernel = [](const KernelArgs& args) {
    const ColorMap* connected = args.colormap("colormap");
    const ColorMap map = connected ? *connected : ColorMap::preset(args.text("colormap"));
    const double lo = args.number("lo");
    const double hi = args.number("hi");
    if (!(lo < hi)) {
      throw Error(ErrorCode::OutOfRange, "node '" + args.node() + "' needs lo < hi",
                  {{"node", args.node()}, {"lo", lo}, {"hi", hi}});
    }
    PortValues out;
    out["image"] = make(color_map(args.channel("scalar").plane, lo, hi, map, args.context().exec));
    return out;
  };
  return f;
}

FilterDef compositing_filter() {
  FilterDef f;
  f.name = "Compositing";
  f.description = "Depth compositing: per pixel the nearest layer wins.";
  f.inputs = {{"depth_a", PortType::Channel}, {"image_a", PortType::Image},
              {"depth_b", PortType::Channel}, {"image_b", PortType::Image},
              {"depth_c", PortType::Channel, false}, {"image_c", PortType::Image, false},
              {"depth_d", PortType::Channel, false}, {"image_d", PortType::Image, false}};
  f.outputs = {{"depth", PortType::Channel}, {"image", PortType::Image}};
  f.kernel = [](const KernelArgs& args) {
    std::vector<Layer> layers;
    for (const char* suffix : {"a", "b", "c", "d"}) {
      const std::string d = std::string("depth_") + suffix;
      const std::string i = std::string("image_") + suffix;
      if (!args.has(d) && !args.has(i)) continue;
      if (args.has(d) != args.has(i)) {
        const std::string missing = args.has(d) ? i : d;
        throw Error(ErrorCode::UnconnectedInput,
                    "node '" + args.node() + "' input '" + missing + "' is not connected but its pair is",
                    {{"node", args.node()}, {"port", missing}});
      }
      const auto& depth = args.channel(d).plane;
      const auto& image = args.image(i);
      require_same_size(args, depth, image);
      if (!layers.empty()) require_same_size(args, depth, layers.front().image);
      layers.push_back({depth, image});
    }
    Layer result = composite(layers, args.context().exec);
    PortValues out;
    out["depth"] = make(ChannelValue{std::move(result.depth), args.channel("depth_a").camera});
    out["image"] = make(std::move(result.image));
    return out;
  };
  return f;
}

FilterDef ssao_filter() {
  FilterDef f;
  f.name = "SSAO";
  f.description = "Screen-space ambient occlusion from depth; radius in percent of the image height.";
  f.params = {number("radius_pct", 1.0, 0.0, 100.0, "sampling radius, percent of the image height", 0.1, true),
              integer("samples", 16, 1, 256, "hemisphere samples per pixel"),
              number("bias", 0.025, 0.0, 1.0, "depth bias, fraction of the radius", 0.005),
              integer("seed", 0, 0, 4294967295.0, "kernel and rotation seed"),
              number("strength", 1.0, 0.0, 4.0, "occlusion multiplier", 0.05)};
  f.inputs = {{"depth", PortType::Channel}};
  f.outputs = {{"occlusion", PortType::Channel}};
  f.kernel = [](const KernelArgs& args) {
    SsaoParams p;
    p.radius_pct = args.number("radius_pct");
    p.samples = static_cast<int>(args.number("samples"));
    p.bias = args.number("bias");
    p.seed = static_cast<std::uint64_t>(args.number("seed"));
    p.strength = args.number("strength");
    const auto& camera = camera_of(args, "depth");
    PortValues out;
    out["occlusion"] = make(ChannelValue{ssao(args.channel("depth").plane, camera, p, args.context().exec), camera});
    return out;
  };
  return f;
}

FilterDef ssdd_filter() {
  FilterDef f;
  f.name = "SSDD";
  f.description = "Screen-space depth darkening: darkens where blurred depth lies in front of the pixel.";
  f.params = {number("sigma", 4.0, 0.0, 64.0, "Gaussian sigma in pixels", 0.5, true),
              number("lambda", 1.0, 0.0, 10.0, "darkening strength", 0.1)};
  f.inputs = {{"depth", PortType::Channel}, {"image", PortType::Image}};
  f.outputs = {{"image", PortType::Image}};
  f.kernel = [](const KernelArgs& args) {
    const auto& depth = args.channel("depth").plane;
    const auto& image = args.image("image");
    require_same_size(args, depth, image);
    PortValues out;
    out["image"] = make(ssdd(depth, image, args.number("sigma"), args.number("lambda"), args.context().exec));
    return out;
  };
  return f;
}

FilterDef ssdof_filter() {
  FilterDef f;
  f.name = "SSDoF";
  f.description = "Screen-space depth of field with a circle of confusion per pixel.";
  f.params = {number("focal_depth", 1.0, 0.0, kHuge, "depth in focus", 0.01, true),
              number("aperture", 0.0, 0.0, 100.0, "CoC scale in pixels", 0.1),
              number("max_radius", 8.0, 0.0, 32.0, "CoC clamp in pixels", 0.5)};
  f.inputs = {{"image", PortType::Image}, {"depth", PortType::Channel}};
  f.outputs = {{"image", PortType::Image}};
  f.kernel = [](const KernelArgs& args) {
    const auto& depth = args.channel("depth").plane;
    const auto& image = args.image("image");
    require_same_size(args, depth, image);
    PortValues out;
    out["image"] = make(ssdof(image, depth, args.number("focal_depth"), args.number("aperture"),
                              args.number("max_radius"), args.context().exec));
    return out;
  };
  return f;
}

FilterDef ibs_filter() {
  FilterDef f;
  f.name = "IBS";
  f.description = "Image-based silhouettes from depth discontinuities.";
  f.params = {number("threshold", 0.05, 0.0, 1.0, "normalized depth jump counted as an edge", 0.005, true),
              integer("halfwidth", 1, 0, 16, "line half width in pixels")};
  f.inputs = {{"depth", PortType::Channel}};
  f.outputs = {{"mask", PortType::Channel}};
  f.kernel = [](const KernelArgs& args) {
    const auto& depth = args.channel("depth");
    PortValues out;
    out["mask"] = make(ChannelValue{ibs(depth.plane, args.number("threshold"),
                                        static_cast<int>(args.number("halfwidth")), args.context().exec),
                                    depth.camera});
    return out;
  };
  return f;
}

FilterDef fxaa_filter() {
  FilterDef f;
  f.name = "FXAA";
  f.description = "Fast approximate anti-aliasing on luma.";
  f.params = {number("edge_threshold", 0.125, 0.0, 1.0, "relative contrast needed to process a pixel", 0.005),
              number("edge_threshold_min", 0.0312, 0.0, 1.0, "absolute contrast floor", 0.001),
              number("subpixel", 0.75, 0.0, 1.0, "sub-pixel aliasing removal", 0.05)};
  f.inputs = {{"image", PortType::Image}};
  f.outputs = {{"image", PortType::Image}};
  f.kernel = [](const KernelArgs& args) {
    FxaaParams p{args.number("edge_threshold"), args.number("edge_threshold_min"), args.number("subpixel")};
    PortValues out;
    out["image"] = make(fxaa(args.image("image"), p, args.context().exec));
    return out;
  };
  return f;
}

FilterDef modulate_filter() {
  FilterDef f;
  f.name = "Modulate";
  f.description = "Applies a mask to an image: multiply-darken or draw a color.";
  f.params = {choice("mode", "multiply", {"multiply", "draw_color"}, "how the mask is applied"),
              number("color_r", 0.0, 0.0, 1.0, "draw color red", 0.01),
              number("color_g", 0.0, 0.0, 1.0, "draw color green", 0.01),
              number("color_b", 0.0, 0.0, 1.0, "draw color blue", 0.01)};
  f.inputs = {{"image", PortType::Image}, {"mask", PortType::Channel}};
  f.outputs = {{"image", PortType::Image}};
  f.kernel = [](const KernelArgs& args) {
    ModulateMode mode;
    if (args.text("mode") == "draw_color") {
      mode.kind = ModulateMode::Kind::DrawColor;
      mode.color = {static_cast<float>(args.number("color_r")), static_cast<float>(args.number("color_g")),
                    static_cast<float>(args.number("color_b")), 1.0f};
    }
    const auto& mask = args.channel("mask").plane;
    const auto& image = args.image("image");
    require_same_size(args, mask, image);
    PortValues out;
    out["image"] = make(modulate(image, mask, mode, args.context().exec));
    return out;
  };
  return f;
}

FilterRegistry build_default() {
  FilterRegistry r;
  r.add(source_filter());
  r.add(color_mapping_filter());
  r.add(compositing_filter());
  r.add(ssao_filter());
  r.add(ssdd_filter());
  r.add(ssdof_filter());
  r.add(ibs_filter());
  r.add(fxaa_filter());
  r.add(modulate_filter());
  return r;
}

}  // namespace

const FilterRegistry& default_registry() {
  static const FilterRegistry registry = build_default();
  return registry;
}

}  // namespace darkroom
