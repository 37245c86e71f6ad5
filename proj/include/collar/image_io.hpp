#pragma once

#include "collar/types.hpp"

#include <filesystem>

namespace collar {

// 16-bit grayscale PNG, one raw depth unit per count.
DepthImage read_depth_png(const std::filesystem::path& path);
void write_depth_png(const std::filesystem::path& path, const DepthImage& depth);

// 8-bit grayscale PNG; any nonzero value reads as set, writes use 0/255.
BinaryMask read_mask_png(const std::filesystem::path& path);
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);

// 8-bit RGB (alpha and palette images are converted on load).
RgbImage read_rgb_png(const std::filesystem::path& path);
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace collar
