#include "darkroom/imaging.hpp"

#include "darkroom/error.hpp"
#include "darkroom/random.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace darkroom {

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();
constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

std::vector<Plane> vector_planes(int w, int h, float fill) {
  return {Plane(w, h, fill), Plane(w, h, fill), Plane(w, h, fill)};
}

void write_vec3(std::vector<Plane>& planes, int x, int y, const Vec3& v) {
  planes[0](x, y) = static_cast<float>(v.x);
  planes[1](x, y) = static_cast<float>(v.y);
  planes[2](x, y) = static_cast<float>(v.z);
}

}  // namespace

void GBuffer::set_channel(std::string name, std::vector<Plane> planes) {
  if (planes.empty()) throw Error(ErrorCode::InvalidArgument, "channel '" + name + "' has no planes");
  for (const auto& p : planes) {
    if (p.width != width_ || p.height != height_) {
      throw Error(ErrorCode::InvalidArgument, "channel '" + name + "' is " + std::to_string(p.width) + "x" +
                                                  std::to_string(p.height) + ", buffer is " +
                                                  std::to_string(width_) + "x" + std::to_string(height_));
    }
  }
  for (auto& c : channels_) {
    if (c.name == name) {
      c.planes = std::move(planes);
      return;
    }
  }
  channels_.push_back({std::move(name), std::move(planes)});
}

bool GBuffer::has(const std::string& name) const {
  return std::any_of(channels_.begin(), channels_.end(), [&](const Channel& c) { return c.name == name; });
}

const Channel& GBuffer::channel(const std::string& name) const {
  for (const auto& c : channels_) {
    if (c.name == name) return c;
  }
  throw Error(ErrorCode::MissingChannel, "G-buffer has no channel '" + name + "'", {{"channel", name}});
}

GBuffer render_gbuffer(const TriangleMesh& mesh, const Bvh& bvh, const Camera& camera,
                       const std::vector<std::string>& fields, const RenderOptions& options) {
  camera.validate();
  for (const auto& f : fields) {
    if (!mesh.scalar_fields.contains(f)) {
      throw Error(ErrorCode::Lookup, "unknown scalar field '" + f + "'", {{"field", f}});
    }
  }
  const int w = camera.width;
  const int h = camera.height;
  const CameraBasis basis = camera.basis();

  Plane depth(w, h, kInf);
  std::vector<Plane> scalars(fields.size(), Plane(w, h, kNaN));
  std::vector<Plane> positions = options.emit_position ? vector_planes(w, h, kNaN) : std::vector<Plane>{};
  std::vector<Plane> normals = options.emit_normal ? vector_planes(w, h, kNaN) : std::vector<Plane>{};

  for_rows(h, options.exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      double jx = 0.5;
      double jy = 0.5;
      if (options.jitter_seed) {
        jx = unit_double(pixel_hash(*options.jitter_seed, x, y, 1));
        jy = unit_double(pixel_hash(*options.jitter_seed, x, y, 2));
      }
      const Ray ray = generate_ray(camera, x, y, jx, jy);
      const auto hit = intersect(bvh, mesh, ray);
      if (!hit) continue;

      const Vec3 p = ray.at(hit->t);
      depth(x, y) = static_cast<float>(depth_of(camera, basis, p));
      for (std::size_t f = 0; f < fields.size(); ++f) scalars[f](x, y) = interpolate_scalar(mesh, *hit, fields[f]);
      if (options.emit_position) write_vec3(positions, x, y, p);
      if (options.emit_normal) {
        const auto tri = mesh.corners(hit->triangle_id);
        Vec3 n = normalize(cross(tri[1] - tri[0], tri[2] - tri[0]));
        if (dot(n, ray.direction) > 0.0) n = -n;
        write_vec3(normals, x, y, n);
      }
    }
  });

  GBuffer out(w, h, camera);
  out.set_channel("depth", {std::move(depth)});
  for (std::size_t f = 0; f < fields.size(); ++f) out.set_channel(scalar_channel_name(fields[f]), {scalars[f]});
  if (options.emit_position) out.set_channel("position", std::move(positions));
  if (options.emit_normal) out.set_channel("normal", std::move(normals));
  return out;
}

std::vector<Plane> reconstruct_positions(const Plane& depth, const Camera& camera, Exec exec) {
  const int w = depth.width;
  const int h = depth.height;
  auto positions = vector_planes(w, h, kNaN);
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const float d = depth(x, y);
      if (!std::isfinite(d)) continue;
      const Ray ray = generate_ray(camera, x, y);
      // Orthographic depth is axial, and the orthographic ray runs along the
      // view axis, so both conventions reduce to origin + d * direction.
      write_vec3(positions, x, y, ray.at(d));
    }
  });
  return positions;
}

std::vector<Plane> reconstruct_normals(const std::vector<Plane>& positions, const Camera& camera, Exec exec) {
  const int w = positions.at(0).width;
  const int h = positions.at(0).height;
  const CameraBasis basis = camera.basis();
  constexpr double kNoDepth = std::numeric_limits<double>::quiet_NaN();

  std::vector<double> depth(static_cast<std::size_t>(w) * h, kNoDepth);
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const Vec3 p = read_vec3(positions, x, y);
      if (is_finite(p)) depth[static_cast<std::size_t>(y) * w + x] = depth_of(camera, basis, p);
    }
  });
  auto depth_at = [&](int x, int y) { return depth[static_cast<std::size_t>(y) * w + x]; };

  // |depth step| to the right / downward neighbor, NaN when either side is background.
  std::vector<double> step_x(depth.size(), kNoDepth);
  std::vector<double> step_y(depth.size(), kNoDepth);
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y) * w + x;
      if (x + 1 < w) step_x[i] = std::abs(depth_at(x + 1, y) - depth_at(x, y));
      if (y + 1 < h) step_y[i] = std::abs(depth_at(x, y + 1) - depth_at(x, y));
    }
  });

  auto normals = vector_planes(w, h, kNaN);
  for_rows(h, exec, [&](int y) {
    std::vector<double> window;
    window.reserve(64);
    for (int x = 0; x < w; ++x) {
      if (std::isnan(depth_at(x, y))) continue;

      window.clear();
      for (int wy = std::max(0, y - 2); wy <= std::min(h - 1, y + 2); ++wy) {
        for (int wx = std::max(0, x - 2); wx <= std::min(w - 1, x + 2); ++wx) {
          const auto i = static_cast<std::size_t>(wy) * w + wx;
          if (!std::isnan(step_x[i])) window.push_back(step_x[i]);
          if (!std::isnan(step_y[i])) window.push_back(step_y[i]);
        }
      }
      double median = 0.0;
      if (!window.empty()) {
        auto mid = window.begin() + static_cast<std::ptrdiff_t>(window.size() / 2);
        std::nth_element(window.begin(), mid, window.end());
        median = *mid;
      }
      const double limit = 10.0 * median;
      const Vec3 p = read_vec3(positions, x, y);
      const double d = depth_at(x, y);

      // Derivative along one axis; nothing when no neighbor is finite.
      auto derivative = [&](int dx, int dy) -> std::optional<Vec3> {
        const bool has_fwd = x + dx < w && y + dy < h && !std::isnan(depth_at(x + dx, y + dy));
        const bool has_back = x - dx >= 0 && y - dy >= 0 && !std::isnan(depth_at(x - dx, y - dy));
        if (!has_fwd && !has_back) return std::nullopt;
        const double fwd_step = has_fwd ? std::abs(depth_at(x + dx, y + dy) - d) : 0.0;
        const double back_step = has_back ? std::abs(d - depth_at(x - dx, y - dy)) : 0.0;
        const bool use_fwd = has_fwd && fwd_step <= limit;
        const bool use_back = has_back && back_step <= limit;
        const Vec3 fwd = has_fwd ? read_vec3(positions, x + dx, y + dy) - p : Vec3{};
        const Vec3 back = has_back ? p - read_vec3(positions, x - dx, y - dy) : Vec3{};
        if (use_fwd && use_back) return (fwd + back) * 0.5;
        if (use_fwd) return fwd;
        if (use_back) return back;
        // Both sides jump; keep the smaller step.
        if (has_fwd && (!has_back || fwd_step <= back_step)) return fwd;
        return back;
      };

      const auto dpdx = derivative(1, 0);
      const auto dpdy = derivative(0, 1);
      if (!dpdx || !dpdy) continue;
      const Vec3 c = cross(*dpdx, *dpdy);
      const double len = length(c);
      if (!(len > 0.0) || !std::isfinite(len)) continue;
      Vec3 n = c / len;
      const Vec3 view = camera.projection.is_perspective() ? p - camera.position : basis.forward;
      if (dot(n, view) > 0.0) n = -n;
      write_vec3(normals, x, y, n);
    }
  });
  return normals;
}

}  // namespace darkroom
