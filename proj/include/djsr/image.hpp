#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "djsr/error.hpp"

namespace djsr {

struct Dims {
    int rows = 0;
    int cols = 0;
    bool operator==(const Dims&) const = default;
    std::string str() const { return std::to_string(rows) + "x" + std::to_string(cols); }
};

// Single-channel raster. Pixel values are nominally in [0, 1]; intermediate
// results (normalized patches, detail bands) may leave that range.
class Image {
public:
    Image() = default;
    Image(int rows, int cols, double fill = 0.0);
    Image(Dims dims, double fill = 0.0) : Image(dims.rows, dims.cols, fill) {}
    Image(int rows, int cols, std::vector<double> pixels);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    Dims dims() const { return {rows_, cols_}; }
    std::size_t size() const { return px_.size(); }
    bool empty() const { return px_.empty(); }

    double& operator()(int r, int c) { return px_[static_cast<std::size_t>(r) * cols_ + c]; }
    double operator()(int r, int c) const { return px_[static_cast<std::size_t>(r) * cols_ + c]; }
    double* row(int r) { return px_.data() + static_cast<std::size_t>(r) * cols_; }
    const double* row(int r) const { return px_.data() + static_cast<std::size_t>(r) * cols_; }

    // Edge-clamped access.
    double clamped(int r, int c) const;

    std::span<double> pixels() { return px_; }
    std::span<const double> pixels() const { return px_; }

    Image crop(int row0, int col0, int rows, int cols) const;
    Image crop_center(int rows, int cols) const;
    void paste(const Image& src, int row0, int col0);

    double mean() const;
    bool operator==(const Image&) const = default;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<double> px_;
};

Image clamp01(Image image);

// Crop that may extend past the borders; outside pixels are reflected.
Image crop_reflect(const Image& image, int row0, int col0, int rows, int cols);

// Pads by reflection about the edge pixels (edge not repeated).
Image reflect_pad(const Image& image, int top, int bottom, int left, int right);

// Patch mean / magnitude normalization. The magnitude is the root-mean-square
// of the mean-removed patch, floored at `floor`.
struct NormalizedPatch {
    Image data;
    double mean = 0.0;
    double magnitude = 1.0;
};

NormalizedPatch normalize_patch(const Image& patch, double floor);
Image normalize_with(const Image& patch, double mean, double magnitude);
Image denormalize(const Image& normalized, double mean, double magnitude);

// FNV-1a over the pixel bytes; used for provenance stamps.
std::uint64_t image_hash(const Image& image, std::uint64_t seed = 1469598103934665603ull);

}  // namespace djsr
