#include "darkroom/error.hpp"
#include "darkroom/passes.hpp"
#include "fixtures.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

using namespace darkroom;

namespace {

constexpr float kInf = std::numeric_limits<float>::infinity();
constexpr float kNaN = std::numeric_limits<float>::quiet_NaN();

bool same_bits(const RgbaImage& a, const RgbaImage& b) {
  return a.width == b.width && a.height == b.height &&
         std::memcmp(a.pixels.data(), b.pixels.data(), a.pixels.size() * sizeof(Rgba)) == 0;
}

bool same_bits(const Plane& a, const Plane& b) {
  return a.same_size(b) && std::memcmp(a.data.data(), b.data.data(), a.data.size() * sizeof(float)) == 0;
}

bool in_unit_range(const RgbaImage& img) {
  for (const auto& p : img.pixels) {
    for (float v : {p.r, p.g, p.b, p.a}) {
      if (!(v >= 0.0f && v <= 1.0f)) return false;
    }
  }
  return true;
}

Plane random_plane(int w, int h, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  Plane p(w, h);
  for (auto& v : p.data) v = u(rng);
  return p;
}

// Foreground square at depth 0.2 over a 0.8 background.
Plane square_depth(int size, int lo, int hi, float background = 0.8f) {
  Plane d(size, size, background);
  for (int y = lo; y < hi; ++y) {
    for (int x = lo; x < hi; ++x) d(x, y) = 0.2f;
  }
  return d;
}

double mean(const Plane& p) {
  double s = 0.0;
  for (float v : p.data) s += v;
  return s / static_cast<double>(p.data.size());
}

int count_above(const Plane& p, float t) {
  int n = 0;
  for (float v : p.data) n += v > t ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("color map examples") {
  const ColorMap bw{{{0.0, 0, 0, 0}, {1.0, 1, 1, 1}}, {0.1f, 0.2f, 0.3f, 0.4f}};
  Plane v(5, 1);
  v.data = {2.0f, 6.0f, 4.0f, kNaN, -100.0f};
  const auto img = color_map(v, 2.0, 6.0, bw);
  CHECK(img(0, 0) == Rgba{0, 0, 0, 1});
  CHECK(img(1, 0) == Rgba{1, 1, 1, 1});
  CHECK(img(2, 0).r == doctest::Approx(0.5));
  CHECK(img(2, 0).g == doctest::Approx(0.5));
  CHECK(img(2, 0).b == doctest::Approx(0.5));
  CHECK(img(3, 0) == bw.nan_color);
  CHECK(img(4, 0) == Rgba{0, 0, 0, 1});

  const ColorMap three{{{0.0, 1, 0, 0}, {0.25, 0, 1, 0}, {1.0, 0, 0, 1}}};
  Plane q(1, 1, 0.625f);
  const auto c = color_map(q, 0.0, 1.0, three)(0, 0);
  CHECK(c.g == doctest::Approx(0.5));
  CHECK(c.b == doctest::Approx(0.5));

  CHECK_THROWS_AS(color_map(v, 1.0, 1.0, bw), Error);
  CHECK_THROWS_AS(ColorMap({{{0.0, 0, 0, 0}, {0.0, 1, 1, 1}, {1.0, 1, 1, 1}}}).validate(), Error);
  CHECK_THROWS_AS(ColorMap::preset("nope"), Error);
  for (const auto& name : ColorMap::preset_names()) ColorMap::preset(name).validate();
}

TEST_CASE("composite examples") {
  Layer a{Plane(2, 1), RgbaImage(2, 1, {1, 0, 0, 1})};
  Layer b{Plane(2, 1), RgbaImage(2, 1, {0, 0, 1, 1})};
  a.depth.data = {1.0f, kInf};
  b.depth.data = {2.0f, 2.0f};
  const std::vector<Layer> layers{a, b};
  const auto out = composite(layers);
  CHECK(out.depth(0, 0) == 1.0f);
  CHECK(out.image(0, 0) == Rgba{1, 0, 0, 1});
  CHECK(out.depth(1, 0) == 2.0f);
  CHECK(out.image(1, 0) == Rgba{0, 0, 1, 1});

  Layer empty{Plane(1, 1, kInf), RgbaImage(1, 1, {1, 1, 1, 1})};
  const std::vector<Layer> none{empty, empty};
  const auto bg = composite(none);
  CHECK(std::isinf(bg.depth(0, 0)));
  CHECK(bg.image(0, 0).a == 0.0f);

  const std::vector<Layer> mismatched{a, Layer{Plane(3, 1), RgbaImage(3, 1)}};
  CHECK_THROWS_AS(composite(mismatched), Error);
  CHECK_THROWS_AS(composite(std::span<const Layer>{}), Error);
}

TEST_CASE("composite equals a per-pixel argmin scan") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> level(0, 5);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2 + trial % 3;
    std::vector<Layer> layers;
    for (int i = 0; i < n; ++i) {
      Layer l{Plane(17, 13), test::random_image(17, 13, 100 + trial * 10 + i)};
      // Coarse levels force ties; level 5 is background.
      for (auto& d : l.depth.data) {
        const int k = level(rng);
        d = k == 5 ? kInf : static_cast<float>(k);
      }
      layers.push_back(std::move(l));
    }
    const auto out = composite(layers);
    for (int y = 0; y < 13; ++y) {
      for (int x = 0; x < 17; ++x) {
        int best = -1;
        for (int i = 0; i < n; ++i) {
          const float d = layers[i].depth(x, y);
          if (std::isfinite(d) && (best < 0 || d < layers[best].depth(x, y))) best = i;
        }
        if (best < 0) {
          CHECK(std::isinf(out.depth(x, y)));
          CHECK(out.image(x, y).a == 0.0f);
        } else {
          CHECK(out.depth(x, y) == layers[best].depth(x, y));
          CHECK(out.image(x, y) == layers[best].image(x, y));
        }
      }
    }
  }
}

TEST_CASE("composite is order independent when depths are distinct") {
  std::vector<Layer> layers;
  for (int i = 0; i < 3; ++i) {
    layers.push_back({random_plane(9, 9, 40 + i, 1.0f, 5.0f), test::random_image(9, 9, 50 + i)});
  }
  const auto abc = composite(layers);
  std::vector<Layer> cab{layers[2], layers[0], layers[1]};
  const auto other = composite(cab);
  CHECK(same_bits(abc.depth, other.depth));
  CHECK(same_bits(abc.image, other.image));

  const std::vector<Layer> first{layers[0], layers[1]};
  const std::vector<Layer> nested{composite(first), layers[2]};
  CHECK(same_bits(composite(nested).image, abc.image));
}

TEST_CASE("ssao on a head-on plane is nearly open") {
  const auto scene = test::flat_plane();
  SsaoParams p;
  p.samples = 64;
  const auto ao = ssao(scene.depth, scene.camera, p);
  CHECK(mean(ao) < 0.02);
}

TEST_CASE("ssao on a right-angle crease is about one half") {
  const auto scene = test::crease();
  SsaoParams p;
  p.samples = 64;
  for (double radius : {0.3, 1.0, 3.0}) {
    p.radius_pct = radius;
    const auto ao = ssao(scene.depth, scene.camera, p);
    for (int y = 8; y < scene.depth.height - 8; ++y) {
      CAPTURE(y);
      CHECK(ao(64, y) >= 0.35f);
      CHECK(ao(64, y) <= 0.65f);
    }
    // Interior of each wall is open.
    CHECK(ao(20, 64) < 0.02f);
    CHECK(ao(108, 64) < 0.02f);
  }
}

TEST_CASE("larger ssao radii darken more pixels of a step") {
  const auto scene = test::step();
  SsaoParams p;
  int previous = -1;
  Plane small;
  for (double radius : {0.3, 1.0, 3.0}) {
    p.radius_pct = radius;
    const auto ao = ssao(scene.depth, scene.camera, p);
    const int n = count_above(ao, 0.1f);
    CAPTURE(radius);
    CHECK(n > previous);
    previous = n;
    if (radius == 0.3) small = ao;
    if (radius == 3.0) {
      const auto combined = combine_masks(small, ao);
      const RgbaImage white(ao.width, ao.height, {1, 1, 1, 1});
      const auto both = modulate(white, combined, {});
      const auto only_small = modulate(white, small, {});
      const auto only_large = modulate(white, ao, {});
      for (std::size_t i = 0; i < both.pixels.size(); ++i) {
        CHECK(both.pixels[i].r <= only_small.pixels[i].r);
        CHECK(both.pixels[i].r <= only_large.pixels[i].r);
      }
    }
  }
}

TEST_CASE("ssao is monotone in strength and bounded") {
  const auto scene = test::step(96);
  SsaoParams p;
  p.radius_pct = 3.0;
  Plane previous(scene.depth.width, scene.depth.height, 0.0f);
  for (double strength : {0.0, 0.5, 1.0, 2.0, 4.0}) {
    p.strength = strength;
    const auto ao = ssao(scene.depth, scene.camera, p);
    for (std::size_t i = 0; i < ao.data.size(); ++i) {
      CHECK(ao.data[i] >= previous.data[i]);
      CHECK(ao.data[i] <= 1.0f);
      if (!std::isfinite(scene.depth.data[i])) CHECK(ao.data[i] == 0.0f);
    }
    if (strength == 0.0) CHECK(count_above(ao, 0.0f) == 0);
    previous = ao;
  }
  p.strength = 1.0;
  CHECK(same_bits(ssao(scene.depth, scene.camera, p), ssao(scene.depth, scene.camera, p)));
  p.seed = 99;
  CHECK_FALSE(same_bits(ssao(scene.depth, scene.camera, p), previous));
}

TEST_CASE("ssao parameter validation") {
  SsaoParams p;
  p.radius_pct = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.samples = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.strength = 4.5;
  CHECK_THROWS_AS(p.validate(), Error);
}

TEST_CASE("ssdd identities") {
  const auto img = test::random_image(20, 12, 3);
  const Plane flat(20, 12, 4.0f);
  CHECK(same_bits(ssdd(flat, img, 3.0, 1.0), img));
  const auto depth = random_plane(20, 12, 4, 1.0f, 9.0f);
  CHECK(same_bits(ssdd(depth, img, 3.0, 0.0), img));
  CHECK_THROWS_AS(ssdd(depth, img, 0.0, 1.0), Error);
  CHECK_THROWS_AS(ssdd(Plane(3, 3), img, 1.0, 1.0), Error);
}

TEST_CASE("ssdd darkens a halo around a foreground square") {
  const int size = 64;
  const double sigma = 2.0;
  const auto depth = square_depth(size, 24, 40);
  const RgbaImage img(size, size, {0.7f, 0.7f, 0.7f, 1.0f});
  const auto out = ssdd(depth, img, sigma, 1.0);

  // Direct 2D Gaussian over the normalized step, clamp-to-edge.
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> g;
  double norm = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    g.push_back(std::exp(-0.5 * k * k / (sigma * sigma)));
    norm += g.back();
  }
  auto normalized = [&](int x, int y) {
    x = std::clamp(x, 0, size - 1);
    y = std::clamp(y, 0, size - 1);
    return depth(x, y) < 0.5f ? 0.0 : 1.0;
  };
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      double blurred = 0.0;
      for (int j = -radius; j <= radius; ++j) {
        for (int i = -radius; i <= radius; ++i) blurred += g[i + radius] * g[j + radius] * normalized(x + i, y + j);
      }
      blurred /= norm * norm;
      const double expect = std::clamp(0.7 + std::min(blurred - normalized(x, y), 0.0), 0.0, 1.0);
      CHECK(out(x, y).r == doctest::Approx(expect).epsilon(1e-5));
    }
  }
  for (int x = 40; x < 43; ++x) CHECK(out(x, 32).r < 0.7f);
  for (int x = 23; x > 20; --x) CHECK(out(x, 32).r < 0.7f);
  for (int x = 24; x < 40; ++x) CHECK(out(x, 32).r == 0.7f);
  for (int x = 0; x < 24 - 4 * 2; ++x) CHECK(out(x, 32).r == 0.7f);
  CHECK(out(32, 32 + 20).r == 0.7f);
  CHECK(in_unit_range(out));
}

TEST_CASE("ssdof identities") {
  const auto img = test::random_image(16, 16, 8);
  const auto depth = random_plane(16, 16, 9, 0.5f, 20.0f);
  CHECK(same_bits(ssdof(img, depth, 3.0, 0.0, 8.0), img));
  CHECK(same_bits(ssdof(img, Plane(16, 16, 3.0f), 3.0, 5.0, 8.0), img));
  CHECK_THROWS_AS(ssdof(img, depth, 0.0, 1.0, 8.0), Error);
  CHECK_THROWS_AS(ssdof(img, depth, 1.0, -1.0, 8.0), Error);
}

TEST_CASE("circle of confusion") {
  CHECK(circle_of_confusion(2.0f, 1.0, 4.0, 8.0) == doctest::Approx(2.0));
  CHECK(circle_of_confusion(1.0f, 1.0, 4.0, 8.0) == 0.0);
  CHECK(circle_of_confusion(0.5f, 1.0, 100.0, 8.0) == 8.0);
  CHECK(circle_of_confusion(kInf, 1.0, 3.0, 8.0) == 3.0);
}

TEST_CASE("ssdof keeps an in-focus edge sharp while blurring the far half") {
  const int size = 32;
  RgbaImage img(size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) img(x, y) = x < 16 ? Rgba{0, 0, 0, 1} : Rgba{1, 1, 1, 1};
  }
  Plane depth(size, size, 1.0f);
  for (int y = 16; y < size; ++y) {
    for (int x = 0; x < size; ++x) depth(x, y) = 10.0f;
  }
  const auto out = ssdof(img, depth, 1.0, 4.0, 8.0);
  for (int y = 0; y < 16; ++y) {
    CHECK(out(16, y).r - out(15, y).r == 1.0f);
    for (int x = 0; x < size; ++x) CHECK(out(x, y) == img(x, y));
  }
  for (int y = 20; y < size; ++y) CHECK(out(16, y).r - out(15, y).r < 1.0f);
  CHECK(in_unit_range(out));
}

TEST_CASE("ibs on constant depth or a high threshold is empty") {
  CHECK(count_above(ibs(Plane(12, 12, 2.0f), 0.05, 2), 0.0f) == 0);
  CHECK(count_above(ibs(square_depth(24, 8, 16), 1.0, 2), 0.0f) == 0);
  Plane bg(6, 6, kInf);
  CHECK(count_above(ibs(bg, 0.05, 1), 0.0f) == 0);
  CHECK_THROWS_AS(ibs(bg, 0.0, 1), Error);
}

TEST_CASE("ibs with halfwidth 0 marks a closed ring at the boundary") {
  for (float background : {0.8f, kInf}) {
    const int size = 30;
    const auto depth = square_depth(size, 10, 20, background);
    const auto mask = ibs(depth, 0.05, 0);
    auto inside = [](int x, int y) { return x >= 10 && x < 20 && y >= 10 && y < 20; };
    for (int y = 0; y < size; ++y) {
      for (int x = 0; x < size; ++x) {
        bool across = false;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int sx = x + dx;
            const int sy = y + dy;
            if (sx < 0 || sy < 0 || sx >= size || sy >= size) continue;
            across = across || inside(sx, sy) != inside(x, y);
          }
        }
        CAPTURE(x);
        CAPTURE(y);
        CHECK(mask(x, y) == (across ? 1.0f : 0.0f));
      }
    }
    // The outer ring has no gaps, corners included.
    for (int k = 9; k <= 20; ++k) {
      CHECK(mask(k, 9) == 1.0f);
      CHECK(mask(k, 20) == 1.0f);
      CHECK(mask(9, k) == 1.0f);
      CHECK(mask(20, k) == 1.0f);
    }
  }
}

TEST_CASE("ibs dilation widens and feathers") {
  const auto depth = square_depth(40, 15, 25);
  const auto thin = ibs(depth, 0.05, 0);
  const auto wide = ibs(depth, 0.05, 3);
  CHECK(count_above(wide, 0.5f) > count_above(thin, 0.5f));
  for (std::size_t i = 0; i < wide.data.size(); ++i) {
    CHECK(wide.data[i] >= thin.data[i]);
    CHECK(wide.data[i] <= 1.0f);
  }
  CHECK(wide(20, 11) == 1.0f);
  CHECK(wide(20, 10) == 0.0f);
  // sqrt(13) from the outer corner pixel (14, 14).
  CHECK(wide(11, 12) > 0.0f);
  CHECK(wide(11, 12) < 1.0f);
}

TEST_CASE("fxaa leaves a constant image bit-identical") {
  const RgbaImage img(8, 8, {0.3f, 0.6f, 0.2f, 0.5f});
  CHECK(same_bits(fxaa(img), img));
}

TEST_CASE("fxaa does not smear a straight vertical edge") {
  RgbaImage img(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) img(x, y) = x < 4 ? Rgba{0, 0, 0, 1} : Rgba{1, 1, 1, 1};
  }
  CHECK(same_bits(fxaa(img, {0.125, 0.0312, 0.0}), img));
  const auto out = fxaa(img);
  for (int x = 0; x < 8; ++x) {
    for (int y = 1; y < 8; ++y) CHECK(out(x, y) == out(x, 0));
  }
  for (int x : {0, 1, 2, 5, 6, 7}) CHECK(out(x, 0) == img(x, 0));
}

TEST_CASE("fxaa softens a diagonal staircase") {
  RgbaImage img(8, 8);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) img(x, y) = x > y ? Rgba{1, 1, 1, 1} : Rgba{0, 0, 0, 1};
  }
  const auto out = fxaa(img);
  int intermediate = 0;
  for (int k = 1; k < 6; ++k) {
    for (const auto& px : {out(k + 1, k), out(k, k)}) {
      const float l = luma(px);
      intermediate += (l > 0.01f && l < 0.99f) ? 1 : 0;
    }
  }
  CHECK(intermediate >= 8);
  CHECK(in_unit_range(out));
}

TEST_CASE("fxaa output luma stays within the 3x3 input range") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto img = test::random_image(12, 10, seed);
    // Blocky content triggers long edge searches as well as noise.
    if (seed % 2 == 0) {
      for (int y = 0; y < 10; ++y) {
        for (int x = 0; x < 12; ++x) img(x, y) = img(x / 4 * 4, y / 3 * 3);
      }
    }
    const auto out = fxaa(img);
    for (int y = 0; y < 10; ++y) {
      for (int x = 0; x < 12; ++x) {
        float lo = 1.0f, hi = 0.0f;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const float l = luma(img(std::clamp(x + dx, 0, 11), std::clamp(y + dy, 0, 9)));
            lo = std::min(lo, l);
            hi = std::max(hi, l);
          }
        }
        const float l = luma(out(x, y));
        CHECK(l >= lo - 1e-5f);
        CHECK(l <= hi + 1e-5f);
        CHECK(out(x, y).a == img(x, y).a);
      }
    }
  }
}

TEST_CASE("modulate identities") {
  const auto img = test::random_image(10, 7, 5);
  CHECK(same_bits(modulate(img, Plane(10, 7, 0.0f), {}), img));
  const auto black = modulate(img, Plane(10, 7, 1.0f), {});
  for (std::size_t i = 0; i < img.pixels.size(); ++i) {
    CHECK(black.pixels[i] == Rgba{0, 0, 0, img.pixels[i].a});
  }
  ModulateMode draw{ModulateMode::Kind::DrawColor, {1.0f, 0.0f, 0.0f, 1.0f}};
  const auto red = modulate(img, Plane(10, 7, 1.0f), draw);
  CHECK(red(3, 3) == Rgba{1, 0, 0, img(3, 3).a});
  Plane half(10, 7, 0.5f);
  half(0, 0) = kNaN;
  const auto mixed = modulate(img, half, draw);
  CHECK(mixed(0, 0) == img(0, 0));
  CHECK(mixed(1, 0).g == doctest::Approx(img(1, 0).g * 0.5));
  CHECK_THROWS_AS(modulate(img, Plane(3, 3), {}), Error);
}

TEST_CASE("combined masks equal sequential modulation") {
  const auto img = test::random_image(16, 16, 6);
  const auto a = random_plane(16, 16, 7);
  const auto b = random_plane(16, 16, 8);
  const auto once = modulate(img, combine_masks(a, b), {});
  const auto twice = modulate(modulate(img, a, {}), b, {});
  for (std::size_t i = 0; i < once.pixels.size(); ++i) {
    CHECK(once.pixels[i].r == doctest::Approx(twice.pixels[i].r).epsilon(1e-5));
    CHECK(once.pixels[i].g == doctest::Approx(twice.pixels[i].g).epsilon(1e-5));
    CHECK(once.pixels[i].b == doctest::Approx(twice.pixels[i].b).epsilon(1e-5));
  }
  CHECK_THROWS_AS(combine_masks(a, Plane(2, 2)), Error);
}

TEST_CASE("serial and parallel kernels agree bit for bit") {
  set_thread_limit(4);
  const auto scene = test::step(64);
  const auto img = test::random_image(64, 64, 12);
  const auto mask = random_plane(64, 64, 13);
  const auto map = ColorMap::preset("viridis");

  CHECK(same_bits(color_map(scene.depth, 3.0, 6.0, map, Exec::Serial),
                  color_map(scene.depth, 3.0, 6.0, map, Exec::Parallel)));
  const std::vector<Layer> layers{{scene.depth, img}, {random_plane(64, 64, 14, 2.0f, 8.0f), test::random_image(64, 64, 15)}};
  CHECK(same_bits(composite(layers, Exec::Serial).image, composite(layers, Exec::Parallel).image));
  SsaoParams p;
  p.radius_pct = 2.0;
  CHECK(same_bits(ssao(scene.depth, scene.camera, p, Exec::Serial), ssao(scene.depth, scene.camera, p, Exec::Parallel)));
  CHECK(same_bits(ssdd(scene.depth, img, 3.0, 1.0, Exec::Serial), ssdd(scene.depth, img, 3.0, 1.0, Exec::Parallel)));
  CHECK(same_bits(ssdof(img, scene.depth, 4.0, 3.0, 6.0, Exec::Serial),
                  ssdof(img, scene.depth, 4.0, 3.0, 6.0, Exec::Parallel)));
  CHECK(same_bits(ibs(scene.depth, 0.05, 2, Exec::Serial), ibs(scene.depth, 0.05, 2, Exec::Parallel)));
  CHECK(same_bits(fxaa(img, {}, Exec::Serial), fxaa(img, {}, Exec::Parallel)));
  CHECK(same_bits(modulate(img, mask, {}, Exec::Serial), modulate(img, mask, {}, Exec::Parallel)));
  set_thread_limit(0);
}
