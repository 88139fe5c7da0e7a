#include "djsr/resample.hpp"

#include <algorithm>
#include <cmath>

namespace djsr {

namespace {

constexpr double kExtentTol = 1e-9;

// Per output index: first source tap and its weights.
struct AxisTaps {
    std::vector<int> first;
    std::vector<std::vector<double>> weights;
};

AxisTaps make_axis(int in, int out) {
    AxisTaps taps;
    taps.first.resize(out);
    taps.weights.resize(out);
    const double scale = static_cast<double>(out) / in;
    const double stretch = scale < 1.0 ? 1.0 / scale : 1.0;
    const double support = 2.0 * stretch;
    for (int o = 0; o < out; ++o) {
        const double center = (o + 0.5) / scale - 0.5;
        const int lo = static_cast<int>(std::floor(center - support)) + 1;
        const int hi = static_cast<int>(std::ceil(center + support)) - 1;
        std::vector<double> w;
        w.reserve(hi - lo + 1);
        double sum = 0.0;
        for (int i = lo; i <= hi; ++i) {
            const double k = cubic_kernel((center - i) / stretch);
            w.push_back(k);
            sum += k;
        }
        for (double& v : w) v /= sum;
        taps.first[o] = lo;
        taps.weights[o] = std::move(w);
    }
    return taps;
}

}  // namespace

double cubic_kernel(double x, double a) {
    x = std::fabs(x);
    if (x < 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
    if (x < 2.0) return (((x - 5.0) * x + 8.0) * x - 4.0) * a;
    return 0.0;
}

int scaled_extent(int n, double factor) {
    return std::max(1, static_cast<int>(std::floor(n * factor + 0.5 + kExtentTol)));
}

Dims scaled_dims(Dims dims, double factor) {
    return {scaled_extent(dims.rows, factor), scaled_extent(dims.cols, factor)};
}

int ceil_extent(int n, double factor) {
    return std::max(1, static_cast<int>(std::ceil(n * factor - kExtentTol)));
}

Dims ceil_dims(Dims dims, double factor) {
    return {ceil_extent(dims.rows, factor), ceil_extent(dims.cols, factor)};
}

Image resize_bicubic(const Image& image, Dims target, Clamp clamp) {
    if (target.rows < 1 || target.cols < 1)
        fail(ErrorKind::invalid_argument, "resize target must be at least 1x1, got " + target.str());
    if (image.empty()) fail(ErrorKind::invalid_argument, "resize of empty image");
    if (target == image.dims()) return clamp == Clamp::yes ? clamp01(image) : image;

    const AxisTaps horiz = make_axis(image.cols(), target.cols);
    const AxisTaps vert = make_axis(image.rows(), target.rows);
    const int last_col = image.cols() - 1;
    const int last_row = image.rows() - 1;

    Image tmp(image.rows(), target.cols);
    for (int r = 0; r < image.rows(); ++r) {
        const double* src = image.row(r);
        double* dst = tmp.row(r);
        for (int c = 0; c < target.cols; ++c) {
            const auto& w = horiz.weights[c];
            double acc = 0.0;
            for (std::size_t t = 0; t < w.size(); ++t)
                acc += w[t] * src[std::clamp(horiz.first[c] + static_cast<int>(t), 0, last_col)];
            dst[c] = acc;
        }
    }
    Image out(target);
    for (int r = 0; r < target.rows; ++r) {
        const auto& w = vert.weights[r];
        double* dst = out.row(r);
        for (std::size_t t = 0; t < w.size(); ++t) {
            const double* src = tmp.row(std::clamp(vert.first[r] + static_cast<int>(t), 0, last_row));
            for (int c = 0; c < target.cols; ++c) dst[c] += w[t] * src[c];
        }
    }
    return clamp == Clamp::yes ? clamp01(std::move(out)) : out;
}

Image resize_bicubic(const Image& image, double factor, Clamp clamp) {
    if (!(factor > 0.0)) fail(ErrorKind::invalid_argument, "resize factor must be positive");
    return resize_bicubic(image, scaled_dims(image.dims(), factor), clamp);
}

double sample_bilinear(const Image& image, double r, double c) {
    const int r0 = static_cast<int>(std::floor(r));
    const int c0 = static_cast<int>(std::floor(c));
    const double fr = r - r0;
    const double fc = c - c0;
    const double v00 = image.clamped(r0, c0);
    if (fr == 0.0 && fc == 0.0) return v00;
    const double v01 = image.clamped(r0, c0 + 1);
    const double v10 = image.clamped(r0 + 1, c0);
    const double v11 = image.clamped(r0 + 1, c0 + 1);
    return (1.0 - fr) * ((1.0 - fc) * v00 + fc * v01) + fr * ((1.0 - fc) * v10 + fc * v11);
}

std::vector<double> gaussian_kernel(int size, double sigma) {
    std::vector<double> k(size);
    const double mid = (size - 1) / 2.0;
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        k[i] = std::exp(-(i - mid) * (i - mid) / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& v : k) v /= sum;
    return k;
}

Image gaussian_blur(const Image& image, double sigma) {
    if (sigma <= 0.0) return image;
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    const std::vector<double> k = gaussian_kernel(2 * radius + 1, sigma);
    Image tmp(image.dims());
    for (int r = 0; r < image.rows(); ++r)
        for (int c = 0; c < image.cols(); ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) acc += k[t + radius] * image.clamped(r, c + t);
            tmp(r, c) = acc;
        }
    Image out(image.dims());
    for (int r = 0; r < image.rows(); ++r)
        for (int c = 0; c < image.cols(); ++c) {
            double acc = 0.0;
            for (int t = -radius; t <= radius; ++t) acc += k[t + radius] * tmp.clamped(r + t, c);
            out(r, c) = acc;
        }
    return out;
}

}  // namespace djsr
