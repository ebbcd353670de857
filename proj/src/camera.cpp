#include "darkroom/camera.hpp"

#include "darkroom/error.hpp"

#include <cmath>
#include <numbers>

namespace darkroom {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

Vec3 vec3_from_json(const nlohmann::ordered_json& j, const std::string& pointer) {
  if (!j.is_array() || j.size() != 3) {
    throw Error(ErrorCode::Schema, pointer + ": expected [x, y, z]", {{"path", pointer}});
  }
  for (const auto& v : j) {
    if (!v.is_number()) throw Error(ErrorCode::Schema, pointer + ": expected numbers", {{"path", pointer}});
  }
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Projection projection_from_json(const nlohmann::ordered_json& j, const std::string& pointer) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, pointer + ": expected object", {{"path", pointer}});
  const std::string type = j.value("type", "perspective");
  if (type == "perspective") return Projection::perspective(j.value("fov_y", 45.0));
  if (type == "orthographic") return Projection::orthographic(j.value("height", 1.0));
  throw Error(ErrorCode::Schema, pointer + "/type: unknown projection '" + type + "'",
              {{"path", pointer + "/type"}});
}

nlohmann::json projection_to_json(const Projection& p) {
  if (p.is_perspective()) return {{"type", "perspective"}, {"fov_y", p.fov_y_deg}};
  return {{"type", "orthographic"}, {"height", p.ortho_height}};
}

}  // namespace

void Camera::validate() const {
  if (width < 1 || height < 1) {
    throw Error(ErrorCode::InvalidArgument,
                "resolution must be at least 1x1, got " + std::to_string(width) + "x" + std::to_string(height));
  }
  if (projection.is_perspective() && !(projection.fov_y_deg > 0.0 && projection.fov_y_deg < 180.0)) {
    throw Error(ErrorCode::InvalidArgument, "fov_y must lie in (0, 180)");
  }
  if (!projection.is_perspective() && !(projection.ortho_height > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "orthographic height must be positive");
  }
  if (!(length(target - position) > 0.0)) {
    throw Error(ErrorCode::InvalidArgument, "camera position equals its target");
  }
  if (!(length(up) > 0.0)) throw Error(ErrorCode::InvalidArgument, "up vector is zero");
}

CameraBasis Camera::basis() const {
  const Vec3 forward = normalize(target - position);
  Vec3 hint = normalize(up);
  if (std::abs(dot(forward, hint)) > 1.0 - 1e-6) hint = {1, 0, 0};
  const Vec3 right = normalize(cross(forward, hint));
  return {forward, right, cross(right, forward)};
}

double Camera::half_height() const {
  if (projection.is_perspective()) return std::tan(0.5 * projection.fov_y_deg * kDegToRad);
  return 0.5 * projection.ortho_height;
}

double Camera::world_per_pixel(double axial_depth) const {
  if (projection.is_perspective()) return 2.0 * axial_depth * half_height() / height;
  return projection.ortho_height / height;
}

Ray generate_ray(const Camera& camera, int x, int y, double jitter_x, double jitter_y) {
  const CameraBasis b = camera.basis();
  const double ndc_x = 2.0 * (x + jitter_x) / camera.width - 1.0;
  const double ndc_y = 1.0 - 2.0 * (y + jitter_y) / camera.height;
  const double sx = ndc_x * camera.half_width();
  const double sy = ndc_y * camera.half_height();
  Ray ray;
  if (camera.projection.is_perspective()) {
    ray.origin = camera.position;
    ray.direction = normalize(b.forward + b.right * sx + b.up * sy);
  } else {
    ray.origin = camera.position + b.right * sx + b.up * sy;
    ray.direction = b.forward;
  }
  return ray;
}

std::optional<std::pair<double, double>> project(const Camera& camera, const CameraBasis& basis, const Vec3& p) {
  const Vec3 rel = p - camera.position;
  double sx = dot(rel, basis.right);
  double sy = dot(rel, basis.up);
  if (camera.projection.is_perspective()) {
    const double z = dot(rel, basis.forward);
    if (!(z > 0.0)) return std::nullopt;
    sx /= z;
    sy /= z;
  }
  const double ndc_x = sx / camera.half_width();
  const double ndc_y = sy / camera.half_height();
  return std::pair{(ndc_x + 1.0) * 0.5 * camera.width, (1.0 - ndc_y) * 0.5 * camera.height};
}

double depth_of(const Camera& camera, const CameraBasis& basis, const Vec3& p) {
  if (camera.projection.is_perspective()) return length(p - camera.position);
  return dot(p - camera.position, basis.forward);
}

void SamplingGrid::validate() const {
  if (cameras.empty()) throw Error(ErrorCode::InvalidArgument, "sampling grid is empty");
  for (const auto& cam : cameras) {
    cam.validate();
    if (cam.width != cameras.front().width || cam.height != cameras.front().height) {
      throw Error(ErrorCode::InvalidArgument, "grid cameras differ in resolution");
    }
  }
  for (const auto& axis : axes) {
    if (axis.values.size() != cameras.size()) {
      throw Error(ErrorCode::InvalidArgument, "axis '" + axis.name + "' has " + std::to_string(axis.values.size()) +
                                                  " values for " + std::to_string(cameras.size()) + " cameras");
    }
  }
}

SamplingGrid fibonacci_sphere_grid(const Vec3& center, double radius, int n, int width, int height,
                                   const Projection& projection) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "fibonacci grid needs n >= 1");
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidArgument, "fibonacci grid needs radius > 0");

  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  SamplingGrid grid;
  grid.axes = {{"phi", {}}, {"theta", {}}};
  for (int i = 0; i < n; ++i) {
    const double y = 1.0 - 2.0 * (i + 0.5) / n;
    const double ring = std::sqrt(std::max(0.0, 1.0 - y * y));
    const double azimuth = golden_angle * i;
    const Vec3 dir{std::cos(azimuth) * ring, y, std::sin(azimuth) * ring};

    Camera cam;
    cam.position = center + dir * radius;
    cam.target = center;
    cam.up = {0, 1, 0};
    cam.projection = projection;
    cam.width = width;
    cam.height = height;
    grid.cameras.push_back(cam);

    double phi = std::atan2(dir.z, dir.x) / kDegToRad;
    if (phi < 0.0) phi += 360.0;
    if (phi >= 360.0) phi -= 360.0;
    grid.axes[0].values.push_back(phi);
    grid.axes[1].values.push_back(std::asin(std::clamp(y, -1.0, 1.0)) / kDegToRad);
  }
  grid.validate();
  return grid;
}

SamplingGrid manual_grid(const std::vector<ManualEntry>& entries, const Calibration& calibration) {
  if (entries.empty()) throw Error(ErrorCode::InvalidArgument, "manual grid needs at least one entry");
  SamplingGrid grid;
  for (const auto& [name, value] : entries.front().axis_values) grid.axes.push_back({name, {}});
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& entry = entries[i];
    if (entry.axis_values.size() != grid.axes.size()) {
      throw Error(ErrorCode::InvalidArgument, "manual grid entry " + std::to_string(i) + " has a different axis set");
    }
    for (std::size_t a = 0; a < grid.axes.size(); ++a) {
      if (entry.axis_values[a].first != grid.axes[a].name) {
        throw Error(ErrorCode::InvalidArgument, "manual grid entry " + std::to_string(i) + " names axis '" +
                                                    entry.axis_values[a].first + "' where '" + grid.axes[a].name +
                                                    "' was expected");
      }
      grid.axes[a].values.push_back(entry.axis_values[a].second);
    }
    Camera cam;
    cam.position = entry.position;
    cam.target = calibration.target;
    cam.up = calibration.up;
    cam.projection = calibration.projection;
    cam.width = calibration.width;
    cam.height = calibration.height;
    grid.cameras.push_back(cam);
  }
  grid.validate();
  return grid;
}

SamplingGrid grid_from_json(const nlohmann::ordered_json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Schema, "grid: expected object", {{"path", ""}});
  const std::string mode = doc.value("mode", "");
  int width = 256;
  int height = 256;
  if (doc.contains("resolution")) {
    const auto& res = doc["resolution"];
    if (!res.is_array() || res.size() != 2 || !res[0].is_number_integer() || !res[1].is_number_integer()) {
      throw Error(ErrorCode::Schema, "/resolution: expected [width, height]", {{"path", "/resolution"}});
    }
    width = res[0].get<int>();
    height = res[1].get<int>();
  }
  Projection projection;
  if (doc.contains("projection")) projection = projection_from_json(doc["projection"], "/projection");

  if (mode == "fibonacci") {
    const Vec3 center = doc.contains("center") ? vec3_from_json(doc["center"], "/center") : Vec3{};
    if (!doc.contains("radius") || !doc["radius"].is_number()) {
      throw Error(ErrorCode::Schema, "/radius: required number", {{"path", "/radius"}});
    }
    if (!doc.contains("n") || !doc["n"].is_number_integer()) {
      throw Error(ErrorCode::Schema, "/n: required integer", {{"path", "/n"}});
    }
    return fibonacci_sphere_grid(center, doc["radius"].get<double>(), doc["n"].get<int>(), width, height,
                                 projection);
  }
  if (mode == "manual") {
    Calibration cal;
    cal.width = width;
    cal.height = height;
    cal.projection = projection;
    if (doc.contains("target")) cal.target = vec3_from_json(doc["target"], "/target");
    if (doc.contains("up")) cal.up = vec3_from_json(doc["up"], "/up");
    if (!doc.contains("cameras") || !doc["cameras"].is_array()) {
      throw Error(ErrorCode::Schema, "/cameras: required array", {{"path", "/cameras"}});
    }
    std::vector<ManualEntry> entries;
    for (std::size_t i = 0; i < doc["cameras"].size(); ++i) {
      const auto& cam = doc["cameras"][i];
      const std::string pointer = "/cameras/" + std::to_string(i);
      if (!cam.is_object() || !cam.contains("position")) {
        throw Error(ErrorCode::Schema, pointer + "/position: required", {{"path", pointer + "/position"}});
      }
      ManualEntry entry;
      entry.position = vec3_from_json(cam["position"], pointer + "/position");
      if (cam.contains("axes")) {
        if (!cam["axes"].is_object()) {
          throw Error(ErrorCode::Schema, pointer + "/axes: expected object", {{"path", pointer + "/axes"}});
        }
        for (const auto& [name, value] : cam["axes"].items()) {
          if (!value.is_number()) {
            throw Error(ErrorCode::Schema, pointer + "/axes/" + name + ": expected number",
                        {{"path", pointer + "/axes/" + name}});
          }
          entry.axis_values.emplace_back(name, value.get<double>());
        }
      }
      entries.push_back(std::move(entry));
    }
    return manual_grid(entries, cal);
  }
  throw Error(ErrorCode::Schema, "/mode: expected \"fibonacci\" or \"manual\"", {{"path", "/mode"}});
}

nlohmann::json camera_to_json(const Camera& c) {
  return {{"position", {c.position.x, c.position.y, c.position.z}},
          {"target", {c.target.x, c.target.y, c.target.z}},
          {"up", {c.up.x, c.up.y, c.up.z}},
          {"projection", projection_to_json(c.projection)},
          {"resolution", {c.width, c.height}}};
}

Camera camera_from_json(const nlohmann::json& doc) {
  const nlohmann::ordered_json j = doc;
  Camera c;
  c.position = vec3_from_json(j.at("position"), "/position");
  c.target = vec3_from_json(j.at("target"), "/target");
  c.up = vec3_from_json(j.at("up"), "/up");
  c.projection = projection_from_json(j.at("projection"), "/projection");
  c.width = j.at("resolution").at(0).get<int>();
  c.height = j.at("resolution").at(1).get<int>();
  return c;
}

}  // namespace darkroom
