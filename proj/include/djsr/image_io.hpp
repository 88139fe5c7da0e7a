#pragma once

#include <filesystem>
#include <vector>

#include "djsr/color.hpp"

namespace djsr {

// 8-bit PNG (gray, gray+alpha, RGB, RGBA; 16-bit is reduced), binary or ASCII
// PGM, and binary PPM. Alpha is dropped. Pixels come back normalized to [0, 1].
ColorImage read_image(const std::filesystem::path& path);

// Writes PNG or PGM/PPM, chosen by extension. Values are clamped and rounded
// to 8 bits; YCbCr input is converted to RGB first.
void write_image(const std::filesystem::path& path, const ColorImage& image);
void write_image(const std::filesystem::path& path, const Image& gray);

// Luminance of any readable image.
Image read_luma(const std::filesystem::path& path);

// Readable image files in a directory, sorted by name.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

bool is_image_path(const std::filesystem::path& path);

// 8-bit quantization used when writing; exposed for tests and evaluation.
Image quantize8(const Image& image);

}  // namespace djsr
