#pragma once

#include <array>

#include "djsr/image.hpp"

namespace djsr {

enum class ColorSpace { gray, rgb, ycbcr };

// Planar color raster with normalized [0, 1] channels. Gray images carry a
// single plane.
struct ColorImage {
    std::vector<Image> planes;
    ColorSpace space = ColorSpace::gray;

    int rows() const { return planes.empty() ? 0 : planes.front().rows(); }
    int cols() const { return planes.empty() ? 0 : planes.front().cols(); }
    Dims dims() const { return {rows(), cols()}; }
    bool is_gray() const { return space == ColorSpace::gray; }

    static ColorImage gray(Image y) { return {{std::move(y)}, ColorSpace::gray}; }
};

// Full-range BT.601 (JPEG) conversion, chroma centered on 0.5.
ColorImage rgb_to_ycbcr(const ColorImage& rgb);
ColorImage ycbcr_to_rgb(const ColorImage& ycc);

struct LumaSplit {
    Image y;
    Image cb;  // empty for gray input
    Image cr;
};

// Splits any supported image into luminance (+ chroma when colored).
LumaSplit to_luma(const ColorImage& image);

// Rebuilds an image from luminance and optional chroma. With chroma the
// result is returned in RGB; the chroma planes are consumed untouched.
ColorImage from_luma(const LumaSplit& split);

// Replaces the luma plane of a YCbCr image; chroma planes are not touched.
ColorImage merge_luma(Image y, const Image& cb, const Image& cr);

}  // namespace djsr
