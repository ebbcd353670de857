#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace darkroom {

struct Rgba8Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // RGBA, row-major
};

// 8-bit RGBA PNG with an sRGB chunk. Output depends only on the pixels.
std::vector<std::uint8_t> encode_png(const Rgba8Image& image);

// Decodes an 8-bit RGBA PNG produced by encode_png (tests and tools).
Rgba8Image decode_png(std::span<const std::uint8_t> bytes);

// round-half-up of clamp(v, 0, 1) * 255
std::uint8_t to_unorm8(float v);

}  // namespace darkroom
