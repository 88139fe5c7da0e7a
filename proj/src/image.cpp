#include "djsr/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace djsr {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::invalid_argument: return "invalid_argument";
        case ErrorKind::shape_mismatch: return "shape_mismatch";
        case ErrorKind::io: return "io";
        case ErrorKind::format: return "format";
        case ErrorKind::numeric: return "numeric";
    }
    return "unknown";
}

Image::Image(int rows, int cols, double fill) : rows_(rows), cols_(cols) {
    if (rows < 0 || cols < 0)
        fail(ErrorKind::invalid_argument, "negative image dims " + Dims{rows, cols}.str());
    px_.assign(static_cast<std::size_t>(rows) * cols, fill);
}

Image::Image(int rows, int cols, std::vector<double> pixels)
    : rows_(rows), cols_(cols), px_(std::move(pixels)) {
    if (rows < 0 || cols < 0 || px_.size() != static_cast<std::size_t>(rows) * cols)
        fail(ErrorKind::shape_mismatch, "pixel count " + std::to_string(px_.size()) +
                                            " does not match dims " + Dims{rows, cols}.str());
}

double Image::clamped(int r, int c) const {
    r = std::clamp(r, 0, rows_ - 1);
    c = std::clamp(c, 0, cols_ - 1);
    return (*this)(r, c);
}

Image Image::crop(int row0, int col0, int rows, int cols) const {
    if (row0 < 0 || col0 < 0 || rows < 0 || cols < 0 || row0 + rows > rows_ ||
        col0 + cols > cols_)
        fail(ErrorKind::shape_mismatch, "crop " + Dims{rows, cols}.str() + " at (" +
                                            std::to_string(row0) + "," + std::to_string(col0) +
                                            ") outside image " + dims().str());
    Image out(rows, cols);
    for (int r = 0; r < rows; ++r)
        std::memcpy(out.row(r), row(row0 + r) + col0, sizeof(double) * cols);
    return out;
}

Image Image::crop_center(int rows, int cols) const {
    return crop((rows_ - rows) / 2, (cols_ - cols) / 2, rows, cols);
}

void Image::paste(const Image& src, int row0, int col0) {
    if (row0 < 0 || col0 < 0 || row0 + src.rows() > rows_ || col0 + src.cols() > cols_)
        fail(ErrorKind::shape_mismatch, "paste of " + src.dims().str() + " outside " + dims().str());
    for (int r = 0; r < src.rows(); ++r)
        std::memcpy(row(row0 + r) + col0, src.row(r), sizeof(double) * src.cols());
}

double Image::mean() const {
    if (px_.empty()) return 0.0;
    double sum = 0.0;
    for (double v : px_) sum += v;
    return sum / static_cast<double>(px_.size());
}

Image clamp01(Image image) {
    for (double& v : image.pixels()) v = std::clamp(v, 0.0, 1.0);
    return image;
}

namespace {

int reflect_index(int i, int n) {
    if (n == 1) return 0;
    const int period = 2 * (n - 1);
    i %= period;
    if (i < 0) i += period;
    return i < n ? i : period - i;
}

}  // namespace

Image crop_reflect(const Image& image, int row0, int col0, int rows, int cols) {
    if (image.empty()) fail(ErrorKind::invalid_argument, "crop_reflect of empty image");
    if (row0 >= 0 && col0 >= 0 && row0 + rows <= image.rows() && col0 + cols <= image.cols())
        return image.crop(row0, col0, rows, cols);
    Image out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const int sr = reflect_index(row0 + r, image.rows());
        for (int c = 0; c < cols; ++c) out(r, c) = image(sr, reflect_index(col0 + c, image.cols()));
    }
    return out;
}

Image reflect_pad(const Image& image, int top, int bottom, int left, int right) {
    if (image.empty()) fail(ErrorKind::invalid_argument, "reflect_pad of empty image");
    Image out(image.rows() + top + bottom, image.cols() + left + right);
    for (int r = 0; r < out.rows(); ++r) {
        const int sr = reflect_index(r - top, image.rows());
        for (int c = 0; c < out.cols(); ++c)
            out(r, c) = image(sr, reflect_index(c - left, image.cols()));
    }
    return out;
}

NormalizedPatch normalize_patch(const Image& patch, double floor) {
    NormalizedPatch out;
    out.mean = patch.mean();
    double ss = 0.0;
    for (double v : patch.pixels()) ss += (v - out.mean) * (v - out.mean);
    const double rms = patch.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(patch.size()));
    out.magnitude = std::max(rms, floor);
    out.data = normalize_with(patch, out.mean, out.magnitude);
    return out;
}

Image normalize_with(const Image& patch, double mean, double magnitude) {
    Image out = patch;
    for (double& v : out.pixels()) v = (v - mean) / magnitude;
    return out;
}

Image denormalize(const Image& normalized, double mean, double magnitude) {
    Image out = normalized;
    for (double& v : out.pixels()) v = v * magnitude + mean;
    return out;
}

std::uint64_t image_hash(const Image& image, std::uint64_t seed) {
    std::uint64_t h = seed;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 1099511628211ull;
        }
    };
    const std::int32_t dims[2] = {image.rows(), image.cols()};
    mix(dims, sizeof dims);
    mix(image.pixels().data(), image.size() * sizeof(double));
    return h;
}

}  // namespace djsr
