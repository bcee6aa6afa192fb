// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#include "ffusion/disparity_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

#include "ffusion/error.hpp"

namespace ffusion {

static_assert(std::endian::native == std::endian::little,
              "binary formats are read by memcpy on little-endian hosts");

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw IoError("cannot open " + path.string());
  return f;
}

std::uint32_t read_u32(const unsigned char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

}  // namespace

DisparityMap read_disparity_png(const std::filesystem::path& path) {
  FilePtr file = open_file(path, "rb");
  png_byte signature[8];
  if (std::fread(signature, 1, 8, file.get()) != 8 || png_sig_cmp(signature, 0, 8) != 0) {
    throw ParseError(path.string() + ": not a PNG file");
  }
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: cannot allocate read struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }
  std::vector<png_byte> data;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  // libpng reports errors via longjmp; nothing with a destructor may be
  // constructed between setjmp and the end of this block.
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path.string() + ": corrupt PNG data");
  }
  png_init_io(png, file.get());
  png_set_sig_bytes(png, 8);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ParseError(path.string() + ": disparity PNG must be 16-bit single channel");
  }
  png_set_swap(png);  // network byte order to host (little-endian)
  data.resize(static_cast<std::size_t>(width) * height * 2);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = data.data() + r * width * 2;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  DisparityMap out(static_cast<int>(width), static_cast<int>(height));
  for (png_uint_32 v = 0; v < height; ++v) {
    for (png_uint_32 u = 0; u < width; ++u) {
      std::uint16_t raw;
      std::memcpy(&raw, rows[v] + u * 2, 2);
      if (raw != 0) out.set(static_cast<int>(u), static_cast<int>(v), raw / 256.0);
    }
  }
  return out;
}

void write_disparity_png(const DisparityMap& disparity, const std::filesystem::path& path) {
  const int width = disparity.width();
  const int height = disparity.height();
  if (width <= 0 || height <= 0) throw Error("cannot write an empty disparity PNG");
  std::vector<std::uint16_t> pixels(static_cast<std::size_t>(width) * height, 0);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      if (!disparity.valid(u, v)) continue;
      const double scaled = std::round(disparity.value(u, v) * 256.0);
      if (!(scaled >= 1.0) || scaled > 65535.0) {
        throw Error("disparity at (" + std::to_string(u) + ", " + std::to_string(v) +
                    ") is not representable in a 16-bit PNG");
      }
      pixels[static_cast<std::size_t>(v) * width + u] = static_cast<std::uint16_t>(scaled);
    }
  }
  std::vector<png_bytep> rows(height);
  for (int v = 0; v < height; ++v) {
    rows[v] = reinterpret_cast<png_bytep>(pixels.data() + static_cast<std::size_t>(v) * width);
  }

  FilePtr file = open_file(path, "wb");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) throw IoError("libpng: cannot allocate write struct");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    throw IoError("libpng: cannot allocate info struct");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError(path.string() + ": PNG encoding failed");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 16,
               PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_set_swap(png);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

DisparityMap read_disparity_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char header[kRawDisparityHeaderBytes];
  if (!in.read(reinterpret_cast<char*>(header), sizeof header)) {
    throw ParseError(path.string() + ": truncated disparity header");
  }
  if (std::memcmp(header, kRawDisparityMagic.data(), 4) != 0) {
    throw ParseError(path.string() + ": bad disparity magic");
  }
  const std::uint32_t width = read_u32(header + 4);
  const std::uint32_t height = read_u32(header + 8);
  if (width > (1u << 16) || height > (1u << 16)) {
    throw ParseError(path.string() + ": implausible disparity dimensions");
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  std::vector<float> values(count);
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(count * sizeof(float)))) {
    throw ParseError(path.string() + ": truncated disparity payload, expected " +
                     std::to_string(count) + " values");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw ParseError(path.string() + ": trailing bytes after disparity payload");
  }
  DisparityMap out(static_cast<int>(width), static_cast<int>(height));
  for (std::uint32_t v = 0; v < height; ++v) {
    for (std::uint32_t u = 0; u < width; ++u) {
      const float d = values[static_cast<std::size_t>(v) * width + u];
      if (d > 0.0f && std::isfinite(d)) out.set(static_cast<int>(u), static_cast<int>(v), d);
    }
  }
  return out;
}

void write_disparity_raw(const DisparityMap& disparity, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(kRawDisparityHeaderBytes);
  std::memcpy(bytes.data(), kRawDisparityMagic.data(), 4);
  const auto width = static_cast<std::uint32_t>(disparity.width());
  const auto height = static_cast<std::uint32_t>(disparity.height());
  const std::uint32_t reserved = 0;
  std::memcpy(bytes.data() + 4, &width, 4);
  std::memcpy(bytes.data() + 8, &height, 4);
  std::memcpy(bytes.data() + 12, &reserved, 4);
  std::vector<float> values(static_cast<std::size_t>(width) * height, 0.0f);
  for (int v = 0; v < disparity.height(); ++v) {
    for (int u = 0; u < disparity.width(); ++u) {
      if (disparity.valid(u, v)) {
        values[static_cast<std::size_t>(v) * width + u] =
            static_cast<float>(disparity.value(u, v));
      }
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!out) throw IoError("short write to " + path.string());
}

DisparityMap read_disparity(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  unsigned char sig[8] = {};
  in.read(reinterpret_cast<char*>(sig), sizeof sig);
  in.close();
  if (png_sig_cmp(sig, 0, 8) == 0) return read_disparity_png(path);
  if (std::memcmp(sig, kRawDisparityMagic.data(), 4) == 0) return read_disparity_raw(path);
  throw ParseError(path.string() + ": unrecognised disparity format");
}

}  // namespace ffusion
