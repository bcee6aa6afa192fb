// SPDX-FileCopyrightText: 2026 ffusion contributors
// SPDX-License-Identifier: Apache-2.0

#ifndef FFUSION_DISPARITY_IO_HPP
#define FFUSION_DISPARITY_IO_HPP

#include <array>
#include <filesystem>

#include "ffusion/pseudolidar.hpp"

namespace ffusion {

/// Raw disparity layout, all little-endian:
///   bytes 0-3   magic "DISP"
///   bytes 4-7   uint32 width
///   bytes 8-11  uint32 height
///   bytes 12-15 uint32 reserved, written as 0
///   then width*height float32 values, row-major. Values that are not
///   strictly positive and finite mark invalid pixels.
inline constexpr std::array<char, 4> kRawDisparityMagic{'D', 'I', 'S', 'P'};
inline constexpr std::size_t kRawDisparityHeaderBytes = 16;

/// 16-bit single-channel PNG; disparity = value / 256, value 0 is invalid.
DisparityMap read_disparity_png(const std::filesystem::path& path);
void write_disparity_png(const DisparityMap& disparity, const std::filesystem::path& path);

DisparityMap read_disparity_raw(const std::filesystem::path& path);
void write_disparity_raw(const DisparityMap& disparity, const std::filesystem::path& path);

/// Dispatches on the file signature (PNG or raw).
DisparityMap read_disparity(const std::filesystem::path& path);

}  // namespace ffusion

#endif  // FFUSION_DISPARITY_IO_HPP
