#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "llafs/geometry.hpp"
#include "llafs/synthesis.hpp"

namespace llafs {

// PNG encoding. Masks are 8-bit grayscale with foreground 255; RGB images are
// 8-bit per channel. Encoding is deterministic for identical input.

std::vector<std::uint8_t> encode_png(const RgbImage& image);
std::vector<std::uint8_t> encode_png(const Mask& mask);

RgbImage decode_rgb_png(const std::vector<std::uint8_t>& bytes);
/// Any nonzero gray value is foreground.
Mask decode_mask_png(const std::vector<std::uint8_t>& bytes);

RgbImage read_rgb_png(const std::filesystem::path& path);
Mask read_mask_png(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t size);

}  // namespace llafs
