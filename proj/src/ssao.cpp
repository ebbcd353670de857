#include "darkroom/error.hpp"
#include "darkroom/imaging.hpp"
#include "darkroom/passes.hpp"
#include "darkroom/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace darkroom {

namespace {

// Uniform points in the +z unit half-ball.
std::vector<Vec3> hemisphere_kernel(int samples, std::uint64_t seed) {
  std::mt19937_64 rng(splitmix64(seed));
  std::vector<Vec3> kernel;
  kernel.reserve(static_cast<std::size_t>(samples));
  for (int i = 0; i < samples; ++i) {
    const double z = uniform01(rng);
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    const double r = std::cbrt(uniform01(rng));
    const double ring = std::sqrt(std::max(0.0, 1.0 - z * z));
    kernel.push_back(Vec3{ring * std::cos(phi), ring * std::sin(phi), z} * r);
  }
  return kernel;
}

// Branchless orthonormal basis around a unit normal.
void tangent_frame(const Vec3& n, Vec3& t, Vec3& b) {
  const double sign = std::copysign(1.0, n.z);
  const double a = -1.0 / (sign + n.z);
  const double c = n.x * n.y * a;
  t = {1.0 + sign * n.x * n.x * a, sign * c, -sign * n.x};
  b = {c, sign + n.y * n.y * a, -n.y};
}

double smoothstep(double e0, double e1, double x) {
  const double t = std::clamp((x - e0) / (e1 - e0), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Depth buffer at continuous pixel coordinates (centers at +0.5). Bilinear
// where all four taps are finite surface, extrapolating over the outer half
// pixel at the border; otherwise the containing pixel. NaN off screen.
double sample_depth(const Plane& depth, double u, double v) {
  const int px = static_cast<int>(std::floor(u));
  const int py = static_cast<int>(std::floor(v));
  if (!depth.contains(px, py)) return std::numeric_limits<double>::quiet_NaN();
  if (depth.width < 2 || depth.height < 2) return depth(px, py);
  const double fx = u - 0.5;
  const double fy = v - 0.5;
  const int x0 = std::clamp(static_cast<int>(std::floor(fx)), 0, depth.width - 2);
  const int y0 = std::clamp(static_cast<int>(std::floor(fy)), 0, depth.height - 2);
  const double d00 = depth(x0, y0);
  const double d10 = depth(x0 + 1, y0);
  const double d01 = depth(x0, y0 + 1);
  const double d11 = depth(x0 + 1, y0 + 1);
  if (!(std::isfinite(d00) && std::isfinite(d10) && std::isfinite(d01) && std::isfinite(d11))) return depth(px, py);
  const double tx = fx - x0;
  const double ty = fy - y0;
  return (d00 * (1.0 - tx) + d10 * tx) * (1.0 - ty) + (d01 * (1.0 - tx) + d11 * tx) * ty;
}

}  // namespace

void SsaoParams::validate() const {
  if (!(radius_pct > 0.0)) throw Error(ErrorCode::OutOfRange, "ssao radius_pct must be > 0");
  if (samples < 1) throw Error(ErrorCode::OutOfRange, "ssao samples must be >= 1");
  if (!(strength >= 0.0 && strength <= 4.0)) throw Error(ErrorCode::OutOfRange, "ssao strength must lie in [0, 4]");
  if (!(bias >= 0.0)) throw Error(ErrorCode::OutOfRange, "ssao bias must be >= 0");
}

Plane ssao(const Plane& depth, const Camera& camera, const SsaoParams& params, Exec exec) {
  params.validate();
  const int w = depth.width;
  const int h = depth.height;
  const CameraBasis basis = camera.basis();
  const auto positions = reconstruct_positions(depth, camera, exec);
  const auto normals = reconstruct_normals(positions, camera, exec);
  const auto kernel = hemisphere_kernel(params.samples, params.seed);
  const double radius_fraction = params.radius_pct / 100.0 * h;

  Plane occlusion(w, h, 0.0f);
  for_rows(h, exec, [&](int y) {
    for (int x = 0; x < w; ++x) {
      if (!std::isfinite(depth(x, y))) continue;
      const Vec3 p = read_vec3(positions, x, y);
      const Vec3 n = read_vec3(normals, x, y);
      if (!is_finite(n)) continue;

      const double axial = dot(p - camera.position, basis.forward);
      const double r_world = radius_fraction * camera.world_per_pixel(axial);
      Vec3 t, b;
      tangent_frame(n, t, b);
      const double angle = 2.0 * std::numbers::pi * unit_double(pixel_hash(params.seed, x, y, 7));
      const double ca = std::cos(angle);
      const double sa = std::sin(angle);

      double sum = 0.0;
      for (const auto& k : kernel) {
        const double kx = k.x * ca - k.y * sa;
        const double ky = k.x * sa + k.y * ca;
        const Vec3 s = p + (t * kx + b * ky + n * k.z) * r_world;
        const auto screen = project(camera, basis, s);
        if (!screen) continue;
        const double scene = sample_depth(depth, screen->first, screen->second);
        if (!std::isfinite(scene)) continue;
        const double sample = depth_of(camera, basis, s);
        if (scene >= sample - params.bias * r_world) continue;
        // Range check on the gap between the sample and the surface in front
        // of it, so distant foreground geometry does not occlude.
        const double falloff = 1.0 - smoothstep(0.8, 1.2, (sample - scene) / r_world);
        sum += falloff;
      }
      occlusion(x, y) = static_cast<float>(std::clamp(params.strength * sum / params.samples, 0.0, 1.0));
    }
  });
  return occlusion;
}

}  // namespace darkroom
