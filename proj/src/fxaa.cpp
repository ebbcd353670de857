#include "darkroom/passes.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace darkroom {

namespace {

// End-of-edge search step lengths (12 steps, the extreme-quality preset).
constexpr std::array<float, 12> kSearchSteps = {1.0f, 1.0f, 1.0f, 1.0f, 1.0f, 1.5f,
                                                2.0f, 2.0f, 2.0f, 2.0f, 4.0f, 8.0f};

// Bilinear lookups in pixel space; pixel (x, y) has its center at
// (x + 0.5, y + 0.5). Edges clamp.
class Sampler {
 public:
  Sampler(const RgbaImage& image, const Plane& luma) : image_(image), luma_(luma) {}

  float luma_at(int x, int y) const {
    return luma_(std::clamp(x, 0, luma_.width - 1), std::clamp(y, 0, luma_.height - 1));
  }

  float luma(float u, float v) const {
    float out = 0.0f;
    blend(u, v, [&](int x, int y, float w) { out += w * luma_(x, y); });
    return out;
  }

  Rgba color(float u, float v) const {
    Rgba out{};
    blend(u, v, [&](int x, int y, float w) {
      const auto& c = image_(x, y);
      out.r += w * c.r;
      out.g += w * c.g;
      out.b += w * c.b;
    });
    return out;
  }

 private:
  template <typename Fn>
  void blend(float u, float v, Fn&& fn) const {
    const float fx = u - 0.5f;
    const float fy = v - 0.5f;
    const float x0 = std::floor(fx);
    const float y0 = std::floor(fy);
    const float tx = fx - x0;
    const float ty = fy - y0;
    const int ix = static_cast<int>(x0);
    const int iy = static_cast<int>(y0);
    const int xa = std::clamp(ix, 0, luma_.width - 1);
    const int xb = std::clamp(ix + 1, 0, luma_.width - 1);
    const int ya = std::clamp(iy, 0, luma_.height - 1);
    const int yb = std::clamp(iy + 1, 0, luma_.height - 1);
    if (tx == 0.0f && ty == 0.0f) {
      fn(xa, ya, 1.0f);
      return;
    }
    fn(xa, ya, (1.0f - tx) * (1.0f - ty));
    fn(xb, ya, tx * (1.0f - ty));
    fn(xa, yb, (1.0f - tx) * ty);
    fn(xb, yb, tx * ty);
  }

  const RgbaImage& image_;
  const Plane& luma_;
};

Rgba fxaa_pixel(const Sampler& tex, const RgbaImage& image, int x, int y, const FxaaParams& params) {
  const Rgba& center = image(x, y);
  const float lumaM = tex.luma_at(x, y);
  float lumaS = tex.luma_at(x, y + 1);
  float lumaE = tex.luma_at(x + 1, y);
  float lumaN = tex.luma_at(x, y - 1);
  float lumaW = tex.luma_at(x - 1, y);

  const float rangeMax = std::max({lumaS, lumaM, lumaE, lumaN, lumaW});
  const float rangeMin = std::min({lumaS, lumaM, lumaE, lumaN, lumaW});
  const float range = rangeMax - rangeMin;
  const float rangeMaxClamped =
      std::max(static_cast<float>(params.edge_threshold_min), rangeMax * static_cast<float>(params.edge_threshold));
  if (range < rangeMaxClamped || !(range > 0.0f)) return center;

  const float lumaNW = tex.luma_at(x - 1, y - 1);
  const float lumaSE = tex.luma_at(x + 1, y + 1);
  const float lumaNE = tex.luma_at(x + 1, y - 1);
  const float lumaSW = tex.luma_at(x - 1, y + 1);

  const float lumaNS = lumaN + lumaS;
  const float lumaWE = lumaW + lumaE;
  const float subpixRcpRange = 1.0f / range;
  const float subpixNSWE = lumaNS + lumaWE;
  const float edgeHorz1 = (-2.0f * lumaM) + lumaNS;
  const float edgeVert1 = (-2.0f * lumaM) + lumaWE;
  const float lumaNESE = lumaNE + lumaSE;
  const float lumaNWNE = lumaNW + lumaNE;
  const float edgeHorz2 = (-2.0f * lumaE) + lumaNESE;
  const float edgeVert2 = (-2.0f * lumaN) + lumaNWNE;
  const float lumaNWSW = lumaNW + lumaSW;
  const float lumaSWSE = lumaSW + lumaSE;
  const float edgeHorz4 = (std::abs(edgeHorz1) * 2.0f) + std::abs(edgeHorz2);
  const float edgeVert4 = (std::abs(edgeVert1) * 2.0f) + std::abs(edgeVert2);
  const float edgeHorz3 = (-2.0f * lumaW) + lumaNWSW;
  const float edgeVert3 = (-2.0f * lumaS) + lumaSWSE;
  const float edgeHorz = std::abs(edgeHorz3) + edgeHorz4;
  const float edgeVert = std::abs(edgeVert3) + edgeVert4;
  const float subpixNWSWNESE = lumaNWSW + lumaNESE;

  // A horizontal span is an edge running along x; the blend then moves in y.
  const bool horzSpan = edgeHorz >= edgeVert;
  float lengthSign = 1.0f;
  const float subpixA = subpixNSWE * 2.0f + subpixNWSWNESE;
  if (!horzSpan) {
    lumaN = lumaW;
    lumaS = lumaE;
  }
  const float subpixB = (subpixA * (1.0f / 12.0f)) - lumaM;
  const float gradientN = lumaN - lumaM;
  const float gradientS = lumaS - lumaM;
  float lumaNN = lumaN + lumaM;
  const float lumaSS = lumaS + lumaM;
  const bool pairN = std::abs(gradientN) >= std::abs(gradientS);
  const float gradient = std::max(std::abs(gradientN), std::abs(gradientS));
  if (pairN) lengthSign = -lengthSign;
  const float subpixC = std::clamp(std::abs(subpixB) * subpixRcpRange, 0.0f, 1.0f);

  const float posMx = x + 0.5f;
  const float posMy = y + 0.5f;
  float posBx = posMx;
  float posBy = posMy;
  const float offNPx = horzSpan ? 1.0f : 0.0f;
  const float offNPy = horzSpan ? 0.0f : 1.0f;
  if (!horzSpan) posBx += lengthSign * 0.5f;
  if (horzSpan) posBy += lengthSign * 0.5f;

  float posNx = posBx - offNPx * kSearchSteps[0];
  float posNy = posBy - offNPy * kSearchSteps[0];
  float posPx = posBx + offNPx * kSearchSteps[0];
  float posPy = posBy + offNPy * kSearchSteps[0];
  const float subpixD = ((-2.0f) * subpixC) + 3.0f;
  float lumaEndN = tex.luma(posNx, posNy);
  const float subpixE = subpixC * subpixC;
  float lumaEndP = tex.luma(posPx, posPy);

  if (!pairN) lumaNN = lumaSS;
  const float gradientScaled = gradient * 1.0f / 4.0f;
  const float lumaMM = lumaM - lumaNN * 0.5f;
  const float subpixF = subpixD * subpixE;
  const bool lumaMLTZero = lumaMM < 0.0f;

  lumaEndN -= lumaNN * 0.5f;
  lumaEndP -= lumaNN * 0.5f;
  bool doneN = std::abs(lumaEndN) >= gradientScaled;
  bool doneP = std::abs(lumaEndP) >= gradientScaled;
  // The last step only moves the endpoint; it is not sampled again.
  for (std::size_t step = 1; step < kSearchSteps.size() && !(doneN && doneP); ++step) {
    if (!doneN) {
      posNx -= offNPx * kSearchSteps[step];
      posNy -= offNPy * kSearchSteps[step];
    }
    if (!doneP) {
      posPx += offNPx * kSearchSteps[step];
      posPy += offNPy * kSearchSteps[step];
    }
    if (step + 1 == kSearchSteps.size()) break;
    if (!doneN) {
      lumaEndN = tex.luma(posNx, posNy) - lumaNN * 0.5f;
      doneN = std::abs(lumaEndN) >= gradientScaled;
    }
    if (!doneP) {
      lumaEndP = tex.luma(posPx, posPy) - lumaNN * 0.5f;
      doneP = std::abs(lumaEndP) >= gradientScaled;
    }
  }

  float dstN = posMx - posNx;
  float dstP = posPx - posMx;
  if (!horzSpan) {
    dstN = posMy - posNy;
    dstP = posPy - posMy;
  }
  const bool goodSpanN = (lumaEndN < 0.0f) != lumaMLTZero;
  const bool goodSpanP = (lumaEndP < 0.0f) != lumaMLTZero;
  const float spanLength = dstP + dstN;
  const float spanLengthRcp = 1.0f / spanLength;
  const bool directionN = dstN < dstP;
  const float dst = std::min(dstN, dstP);
  const bool goodSpan = directionN ? goodSpanN : goodSpanP;
  const float subpixG = subpixF * subpixF;
  const float pixelOffset = (dst * (-spanLengthRcp)) + 0.5f;
  const float subpixH = subpixG * static_cast<float>(params.subpixel);
  const float pixelOffsetGood = goodSpan ? pixelOffset : 0.0f;
  const float pixelOffsetSubpix = std::max(pixelOffsetGood, subpixH);

  float u = posMx;
  float v = posMy;
  if (!horzSpan) u += pixelOffsetSubpix * lengthSign;
  if (horzSpan) v += pixelOffsetSubpix * lengthSign;
  Rgba out = tex.color(u, v);
  out.r = std::clamp(out.r, 0.0f, 1.0f);
  out.g = std::clamp(out.g, 0.0f, 1.0f);
  out.b = std::clamp(out.b, 0.0f, 1.0f);
  out.a = center.a;
  return out;
}

}  // namespace

RgbaImage fxaa(const RgbaImage& image, const FxaaParams& params, Exec exec) {
  Plane lumas(image.width, image.height);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) lumas.data[i] = luma(image.pixels[i]);
  const Sampler tex(image, lumas);
  RgbaImage out(image.width, image.height);
  for_rows(image.height, exec, [&](int y) {
    for (int x = 0; x < image.width; ++x) out(x, y) = fxaa_pixel(tex, image, x, y, params);
  });
  return out;
}

}  // namespace darkroom
