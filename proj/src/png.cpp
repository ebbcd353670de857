#include "darkroom/png.hpp"

#include "darkroom/error.hpp"

#include <png.h>

#include <cmath>
#include <csetjmp>
#include <cstring>
#include <string>

namespace darkroom {

namespace {

// libpng reports errors through longjmp; C++ exceptions must not cross it.
struct ErrorSlot {
  char message[256] = {};
};

void on_png_error(png_structp png, png_const_charp message) {
  auto* slot = static_cast<ErrorSlot*>(png_get_error_ptr(png));
  std::strncpy(slot->message, message, sizeof(slot->message) - 1);
  png_longjmp(png, 1);
}

void on_png_warning(png_structp, png_const_charp) {}

void write_to_vector(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void flush_nothing(png_structp) {}

struct ReadCursor {
  const std::uint8_t* data = nullptr;
  std::size_t size = 0;
  std::size_t pos = 0;
};

void read_from_span(png_structp png, png_bytep data, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->size - cursor->pos < length) png_error(png, "truncated stream");
  std::memcpy(data, cursor->data + cursor->pos, length);
  cursor->pos += length;
}

// Returns false after a libpng error; `out` must already have its final size
// for decode, and is appended to for encode.
bool write_png(const Rgba8Image& image, std::vector<std::uint8_t>* out, ErrorSlot* slot) {
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, slot, on_png_error, on_png_warning);
  if (png == nullptr) return false;
  png_infop info = png_create_info_struct(png);
  if (info == nullptr || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    return false;
  }
  png_set_write_fn(png, out, write_to_vector, flush_nothing);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width), static_cast<png_uint_32>(image.height), 8,
               PNG_COLOR_TYPE_RGBA, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_sRGB(png, info, PNG_sRGB_INTENT_PERCEPTUAL);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  const std::size_t stride = static_cast<std::size_t>(image.width) * 4;
  for (int y = 0; y < image.height; ++y) {
    png_write_row(png, image.pixels.data() + stride * static_cast<std::size_t>(y));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return true;
}

bool read_png_header(png_structp png, png_infop info, ReadCursor* cursor, int* width, int* height) {
  if (setjmp(png_jmpbuf(png))) return false;
  png_set_read_fn(png, cursor, read_from_span);
  png_read_info(png, info);
  if (png_get_bit_depth(png, info) != 8 || png_get_color_type(png, info) != PNG_COLOR_TYPE_RGBA) {
    png_error(png, "expected 8-bit RGBA");
  }
  *width = static_cast<int>(png_get_image_width(png, info));
  *height = static_cast<int>(png_get_image_height(png, info));
  return true;
}

bool read_png_rows(png_structp png, std::uint8_t* pixels, int width, int height) {
  if (setjmp(png_jmpbuf(png))) return false;
  const std::size_t stride = static_cast<std::size_t>(width) * 4;
  for (int y = 0; y < height; ++y) png_read_row(png, pixels + stride * static_cast<std::size_t>(y), nullptr);
  png_read_end(png, nullptr);
  return true;
}

}  // namespace

std::uint8_t to_unorm8(float v) {
  if (!(v > 0.0f)) return 0;
  if (v >= 1.0f) return 255;
  return static_cast<std::uint8_t>(std::floor(static_cast<double>(v) * 255.0 + 0.5));
}

std::vector<std::uint8_t> encode_png(const Rgba8Image& image) {
  std::vector<std::uint8_t> out;
  ErrorSlot slot;
  if (!write_png(image, &out, &slot)) throw Error(ErrorCode::Io, std::string("png encode: ") + slot.message);
  return out;
}

Rgba8Image decode_png(std::span<const std::uint8_t> bytes) {
  ErrorSlot slot;
  ReadCursor cursor{bytes.data(), bytes.size(), 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &slot, on_png_error, on_png_warning);
  if (png == nullptr) throw Error(ErrorCode::Io, "png: cannot allocate reader");
  png_infop info = png_create_info_struct(png);
  Rgba8Image image;
  bool ok = info != nullptr && read_png_header(png, info, &cursor, &image.width, &image.height);
  if (ok) {
    image.pixels.resize(static_cast<std::size_t>(image.width) * static_cast<std::size_t>(image.height) * 4);
    ok = read_png_rows(png, image.pixels.data(), image.width, image.height);
  }
  png_destroy_read_struct(&png, &info, nullptr);
  if (!ok) throw Error(ErrorCode::CorruptPayload, std::string("png decode: ") + slot.message);
  return image;
}

}  // namespace darkroom
