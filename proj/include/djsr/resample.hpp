#pragma once

#include <vector>

#include "djsr/image.hpp"

namespace djsr {

enum class Clamp { yes, no };

// Catmull-Rom (a = -0.5) bicubic resize with edge-clamped sampling. When
// shrinking, the kernel is widened by the inverse scale so downscaling is
// antialiased. Output is clamped to [0, 1] unless Clamp::no.
Image resize_bicubic(const Image& image, Dims target, Clamp clamp = Clamp::yes);

// Resize by a factor; target dims are round_half_up(dims * factor).
Image resize_bicubic(const Image& image, double factor, Clamp clamp = Clamp::yes);

// round-half-up(n * factor), at least 1. A small tolerance absorbs products
// such as 256 * 1.2 * 1.2 landing a hair under the half.
int scaled_extent(int n, double factor);
Dims scaled_dims(Dims dims, double factor);

// ceil(n * factor) with the same tolerance.
int ceil_extent(int n, double factor);
Dims ceil_dims(Dims dims, double factor);

double cubic_kernel(double x, double a = -0.5);

double sample_bilinear(const Image& image, double r, double c);

// Separable Gaussian blur, edge-clamped, radius ceil(3 sigma).
Image gaussian_blur(const Image& image, double sigma);

std::vector<double> gaussian_kernel(int size, double sigma);

}  // namespace djsr
