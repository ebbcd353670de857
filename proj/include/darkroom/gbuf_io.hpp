#pragma once

#include "darkroom/imaging.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace darkroom {

// .gbuf container, little-endian:
//
//   "CDGB" | u32 version (1) | u32 width | u32 height | u32 channel_count
//   per channel: u16 name_length | name (UTF-8) | u8 plane_count |
//                plane_count * width * height float32, row-major
//   remainder of the file: JSON camera calibration
inline constexpr std::uint32_t kGbufVersion = 1;

std::vector<std::uint8_t> encode_gbuf(const GBuffer& gbuffer);
// Throws Error(VersionMismatch) or Error(CorruptPayload).
GBuffer decode_gbuf(std::span<const std::uint8_t> bytes);

void write_gbuf(const std::filesystem::path& path, const GBuffer& gbuffer);
GBuffer read_gbuf(const std::filesystem::path& path);

// Bytes a buffer occupies on disk: header, channel headers, float payload and
// the camera JSON.
std::uint64_t gbuf_size(const GBuffer& gbuffer);

}  // namespace darkroom
