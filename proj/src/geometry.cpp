#include "darkroom/geometry.hpp"

#include "darkroom/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace darkroom {

void TriangleMesh::validate() const {
  if (triangles.empty()) throw Error(ErrorCode::InvalidArgument, "mesh has no triangles");
  const auto n = vertices.size();
  for (std::size_t i = 0; i < triangles.size(); ++i) {
    for (auto idx : triangles[i]) {
      if (idx >= n) {
        throw Error(ErrorCode::InvalidArgument,
                    "triangle " + std::to_string(i) + " references vertex " + std::to_string(idx) + " of " +
                        std::to_string(n));
      }
    }
  }
  for (const auto& [name, values] : scalar_fields) {
    if (values.size() != n) {
      throw Error(ErrorCode::InvalidArgument, "scalar field '" + name + "' has " + std::to_string(values.size()) +
                                                  " values for " + std::to_string(n) + " vertices");
    }
  }
}

Aabb bounds(const TriangleMesh& mesh) {
  Aabb box;
  for (const auto& v : mesh.vertices) box.grow(v);
  return box;
}

namespace {

struct BuildItem {
  Aabb box;
  Vec3 centroid;
};

class BvhBuilder {
 public:
  BvhBuilder(const TriangleMesh& mesh, Bvh& out) : out_(out) {
    items_.resize(mesh.triangles.size());
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
      for (const auto& p : mesh.corners(i)) items_[i].box.grow(p);
      items_[i].centroid = items_[i].box.center();
    }
    out_.order.resize(items_.size());
    std::iota(out_.order.begin(), out_.order.end(), 0u);
  }

  void build() {
    out_.nodes.reserve(2 * items_.size());
    out_.nodes.push_back({});
    split(0, 0, static_cast<std::uint32_t>(items_.size()), 1);
  }

 private:
  struct Bin {
    Aabb box;
    std::uint32_t count = 0;
  };

  void split(std::uint32_t node_index, std::uint32_t begin, std::uint32_t end, std::uint32_t depth) {
    out_.depth = std::max(out_.depth, depth);
    Aabb box;
    Aabb centroid_box;
    for (auto i = begin; i < end; ++i) {
      box.grow(items_[out_.order[i]].box);
      centroid_box.grow(items_[out_.order[i]].centroid);
    }
    out_.nodes[node_index].box = box;
    const auto count = end - begin;
    if (count <= kBvhMaxLeafSize) {
      make_leaf(node_index, begin, count);
      return;
    }

    const auto mid = partition_sah(begin, end, centroid_box);

    const auto left = static_cast<std::uint32_t>(out_.nodes.size());
    out_.nodes.push_back({});
    out_.nodes.push_back({});
    out_.nodes[node_index].first = left;
    out_.nodes[node_index].count = 0;
    split(left, begin, mid, depth + 1);
    split(left + 1, mid, end, depth + 1);
  }

  void make_leaf(std::uint32_t node_index, std::uint32_t begin, std::uint32_t count) {
    out_.nodes[node_index].first = begin;
    out_.nodes[node_index].count = count;
  }

  // Returns the split index; falls back to a median split on the widest
  // centroid axis when every binned split is degenerate.
  std::uint32_t partition_sah(std::uint32_t begin, std::uint32_t end, const Aabb& centroid_box) {
    double best_cost = std::numeric_limits<double>::infinity();
    int best_axis = -1;
    int best_bin = 0;
    const Vec3 extent = centroid_box.hi - centroid_box.lo;

    for (int axis = 0; axis < 3; ++axis) {
      if (!(extent[axis] > 0.0)) continue;
      std::array<Bin, kBvhBins> bins{};
      const double scale = kBvhBins / extent[axis];
      for (auto i = begin; i < end; ++i) {
        const auto& item = items_[out_.order[i]];
        auto& bin = bins[bin_of(item.centroid[axis], centroid_box.lo[axis], scale)];
        bin.box.grow(item.box);
        ++bin.count;
      }
      std::array<double, kBvhBins> right_cost{};
      Aabb acc;
      std::uint32_t acc_count = 0;
      for (int b = kBvhBins - 1; b > 0; --b) {
        acc.grow(bins[b].box);
        acc_count += bins[b].count;
        right_cost[b] = acc_count == 0 ? 0.0 : acc.surface_area() * acc_count;
      }
      acc = Aabb{};
      acc_count = 0;
      for (int b = 0; b < kBvhBins - 1; ++b) {
        acc.grow(bins[b].box);
        acc_count += bins[b].count;
        const auto right_count = (end - begin) - acc_count;
        if (acc_count == 0 || right_count == 0) continue;
        const double cost = acc.surface_area() * acc_count + right_cost[b + 1];
        if (cost < best_cost) {
          best_cost = cost;
          best_axis = axis;
          best_bin = b;
        }
      }
    }

    auto* first = out_.order.data() + begin;
    auto* last = out_.order.data() + end;
    if (best_axis < 0) {
      int axis = 0;
      if (extent.y > extent[axis]) axis = 1;
      if (extent.z > extent[axis]) axis = 2;
      auto* middle = first + (end - begin) / 2;
      std::nth_element(first, middle, last, [&](std::uint32_t a, std::uint32_t b) {
        const double ca = items_[a].centroid[axis];
        const double cb = items_[b].centroid[axis];
        return ca < cb || (ca == cb && a < b);
      });
      return begin + (end - begin) / 2;
    }

    const double scale = kBvhBins / extent[best_axis];
    const double lo = centroid_box.lo[best_axis];
    auto* middle = std::stable_partition(first, last, [&](std::uint32_t idx) {
      return bin_of(items_[idx].centroid[best_axis], lo, scale) <= best_bin;
    });
    return begin + static_cast<std::uint32_t>(middle - first);
  }

  static int bin_of(double c, double lo, double scale) {
    const int b = static_cast<int>((c - lo) * scale);
    return std::clamp(b, 0, kBvhBins - 1);
  }

  Bvh& out_;
  std::vector<BuildItem> items_;
};

// Slab test against [t_min, t_max]; returns the entry distance or nothing.
std::optional<double> hit_box(const Aabb& box, const Ray& ray, const Vec3& inv_dir, double t_max) {
  double t0 = ray.t_min;
  double t1 = t_max;
  for (int axis = 0; axis < 3; ++axis) {
    const double o = ray.origin[axis];
    if (ray.direction[axis] == 0.0) {
      if (o < box.lo[axis] || o > box.hi[axis]) return std::nullopt;
      continue;
    }
    double near = (box.lo[axis] - o) * inv_dir[axis];
    double far = (box.hi[axis] - o) * inv_dir[axis];
    if (near > far) std::swap(near, far);
    // Widen by a few ulps so hits on box faces are never lost to rounding.
    near *= 1.0 - 1e-12;
    far *= 1.0 + 1e-12;
    t0 = std::max(t0, near);
    t1 = std::min(t1, far);
    if (t0 > t1) return std::nullopt;
  }
  return t0;
}

bool closer(const Hit& candidate, const std::optional<Hit>& best) {
  if (!best) return true;
  return candidate.t < best->t || (candidate.t == best->t && candidate.triangle_id < best->triangle_id);
}

}  // namespace

Bvh build_bvh(const TriangleMesh& mesh) {
  mesh.validate();
  Bvh bvh;
  BvhBuilder(mesh, bvh).build();
  return bvh;
}

std::optional<Hit> intersect_triangle(const Ray& ray, const std::array<Vec3, 3>& tri) {
  constexpr double kDetEpsilon = 1e-9;
  const Vec3 e1 = tri[1] - tri[0];
  const Vec3 e2 = tri[2] - tri[0];
  const Vec3 p = cross(ray.direction, e2);
  const double det = dot(e1, p);
  if (std::abs(det) <= kDetEpsilon) return std::nullopt;
  const double inv_det = 1.0 / det;
  const Vec3 s = ray.origin - tri[0];
  const double u = dot(s, p) * inv_det;
  if (u < 0.0 || u > 1.0) return std::nullopt;
  const Vec3 q = cross(s, e1);
  const double v = dot(ray.direction, q) * inv_det;
  if (v < 0.0 || u + v > 1.0) return std::nullopt;
  const double t = dot(e2, q) * inv_det;
  if (t < ray.t_min || t > ray.t_max) return std::nullopt;
  return Hit{t, 0, u, v};
}

std::optional<Hit> intersect(const Bvh& bvh, const TriangleMesh& mesh, const Ray& ray) {
  if (bvh.nodes.empty()) return std::nullopt;
  const Vec3 inv_dir{1.0 / ray.direction.x, 1.0 / ray.direction.y, 1.0 / ray.direction.z};

  std::optional<Hit> best;
  thread_local std::vector<std::uint32_t> stack;
  stack.resize(bvh.depth + 2);
  int top = 0;
  stack[top++] = 0;
  while (top > 0) {
    const auto& node = bvh.nodes[stack[--top]];
    const double limit = best ? best->t : ray.t_max;
    if (!hit_box(node.box, ray, inv_dir, limit)) continue;

    if (node.is_leaf()) {
      for (std::uint32_t i = 0; i < node.count; ++i) {
        const auto id = bvh.order[node.first + i];
        auto hit = intersect_triangle(ray, mesh.corners(id));
        if (!hit) continue;
        hit->triangle_id = id;
        if (closer(*hit, best)) best = hit;
      }
      continue;
    }

    // Visit the nearer child first.
    const auto& left = bvh.nodes[node.first];
    const auto& right = bvh.nodes[node.first + 1];
    const auto dl = hit_box(left.box, ray, inv_dir, limit);
    const auto dr = hit_box(right.box, ray, inv_dir, limit);
    if (dl && dr) {
      if (*dl <= *dr) {
        stack[top++] = node.first + 1;
        stack[top++] = node.first;
      } else {
        stack[top++] = node.first;
        stack[top++] = node.first + 1;
      }
    } else if (dl) {
      stack[top++] = node.first;
    } else if (dr) {
      stack[top++] = node.first + 1;
    }
  }
  return best;
}

float interpolate_scalar(const TriangleMesh& mesh, const Hit& hit, const std::string& field) {
  const auto it = mesh.scalar_fields.find(field);
  if (it == mesh.scalar_fields.end()) {
    throw Error(ErrorCode::Lookup, "unknown scalar field '" + field + "'", {{"field", field}});
  }
  const auto& values = it->second;
  const auto& tri = mesh.triangles[hit.triangle_id];
  const double value = hit.w() * values[tri[0]] + hit.u * values[tri[1]] + hit.v * values[tri[2]];
  return static_cast<float>(value);
}

}  // namespace darkroom
