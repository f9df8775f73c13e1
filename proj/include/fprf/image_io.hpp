#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fprf/tensor.hpp"

namespace fprf {

// 8-bit PNG I/O. Values are stored as-is (v * 255, rounded, clamped to
// [0, 255]); no transfer function is applied on either side.

// Returns [H x W x 3] in [0, 1]. Gray inputs are replicated, alpha is dropped.
Tensor read_png_rgb(const std::string& path);

// Raw 8-bit channel (0 = red) as [H x W] integers.
std::vector<uint8_t> read_png_channel(const std::string& path, size_t channel, size_t& height, size_t& width);

// Accepts [H x W x 1] or [H x W x 3] tensors.
void write_png(const std::string& path, const Tensor& image);
void write_png_u8(const std::string& path, const std::vector<uint8_t>& rgb, size_t height, size_t width);

}  // namespace fprf
