// Serial reference vs OpenMP kernels on a rendered torus view.

#include "darkroom/camera.hpp"
#include "darkroom/geometry.hpp"
#include "darkroom/imaging.hpp"
#include "darkroom/passes.hpp"
#include "darkroom/primitives.hpp"

#include <benchmark/benchmark.h>

using namespace darkroom;

namespace {

struct Scene {
  TriangleMesh mesh;
  Bvh bvh;
  Camera camera;
  Plane depth;
  RgbaImage image;
};

const Scene& scene() {
  static const Scene s = [] {
    Scene sc;
    sc.mesh = make_torus(1.0, 0.35, 64, 32);
    sc.bvh = build_bvh(sc.mesh);
    sc.camera = fibonacci_sphere_grid({}, 3.5, 8, 256, 256).cameras[3];
    const auto g = render_gbuffer(sc.mesh, sc.bvh, sc.camera, {"height"});
    sc.depth = g.plane("depth");
    sc.image = color_map(g.plane("scalar:height"), -0.35, 0.35, ColorMap::preset("viridis"));
    return sc;
  }();
  return s;
}

Exec mode(const benchmark::State& state) { return state.range(0) ? Exec::Parallel : Exec::Serial; }

void BM_Render(benchmark::State& state) {
  const auto& s = scene();
  RenderOptions options{.emit_normal = true, .exec = mode(state)};
  for (auto _ : state) benchmark::DoNotOptimize(render_gbuffer(s.mesh, s.bvh, s.camera, {"height"}, options));
}

void BM_Ssao(benchmark::State& state) {
  const auto& s = scene();
  for (auto _ : state) benchmark::DoNotOptimize(ssao(s.depth, s.camera, {}, mode(state)));
}

void BM_Ssdd(benchmark::State& state) {
  const auto& s = scene();
  for (auto _ : state) benchmark::DoNotOptimize(ssdd(s.depth, s.image, 4.0, 1.0, mode(state)));
}

void BM_Fxaa(benchmark::State& state) {
  const auto& s = scene();
  for (auto _ : state) benchmark::DoNotOptimize(fxaa(s.image, {}, mode(state)));
}

}  // namespace

BENCHMARK(BM_Render)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssao)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Ssdd)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Fxaa)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
