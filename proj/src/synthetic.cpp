#include "djsr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "djsr/random.hpp"
#include "djsr/resample.hpp"

namespace djsr::synth {

namespace {

constexpr int kSuper = 4;

template <typename F>
Image supersample(Dims dims, F&& f) {
    Image out(dims);
    for (int r = 0; r < dims.rows; ++r)
        for (int c = 0; c < dims.cols; ++c) {
            double acc = 0.0;
            for (int i = 0; i < kSuper; ++i)
                for (int j = 0; j < kSuper; ++j)
                    acc += f(r + (i + 0.5) / kSuper - 0.5, c + (j + 0.5) / kSuper - 0.5);
            out(r, c) = acc / (kSuper * kSuper);
        }
    return out;
}

double rad(double deg) { return deg * std::numbers::pi / 180.0; }

}  // namespace

Image grating(Dims dims, double period, double angle_deg, double phase, double contrast) {
    const double cs = std::cos(rad(angle_deg)), sn = std::sin(rad(angle_deg));
    const double w = 2.0 * std::numbers::pi / period;
    Image out(dims);
    for (int r = 0; r < dims.rows; ++r)
        for (int c = 0; c < dims.cols; ++c)
            out(r, c) = 0.5 + 0.5 * contrast * std::sin(w * (c * cs + r * sn) + phase);
    return out;
}

Image checker(Dims dims, double cell, double angle_deg, double contrast) {
    const double cs = std::cos(rad(angle_deg)), sn = std::sin(rad(angle_deg));
    const double lo = 0.5 - 0.5 * contrast, hi = 0.5 + 0.5 * contrast;
    return supersample(dims, [&](double r, double c) {
        const double u = (c * cs + r * sn) / cell, v = (-c * sn + r * cs) / cell;
        const bool odd = (static_cast<long>(std::floor(u)) + static_cast<long>(std::floor(v))) & 1;
        return odd ? hi : lo;
    });
}

Image disks(Dims dims, int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ur(0.0, dims.rows), uc(0.0, dims.cols);
    std::uniform_real_distribution<double> radius(2.0, std::max(3.0, std::min(dims.rows, dims.cols) / 4.0));
    std::uniform_real_distribution<double> shade(0.1, 0.9);
    struct Disk {
        double r, c, rad, v;
    };
    std::vector<Disk> list;
    for (int k = 0; k < count; ++k) list.push_back({ur(rng), uc(rng), radius(rng), shade(rng)});
    const double background = shade(rng);
    return supersample(dims, [&](double r, double c) {
        double v = background;
        for (const Disk& d : list)
            if ((r - d.r) * (r - d.r) + (c - d.c) * (c - d.c) <= d.rad * d.rad) v = d.v;
        return v;
    });
}

Image smooth_noise(Dims dims, double sigma, std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Image raw(dims);
    for (double& v : raw.pixels()) v = n(rng);
    Image out = gaussian_blur(raw, sigma);
    double lo = out.pixels()[0], hi = lo;
    for (double v : out.pixels()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = hi - lo > 0.0 ? hi - lo : 1.0;
    for (double& v : out.pixels()) v = 0.1 + 0.8 * (v - lo) / span;
    return out;
}

Image bricks(Dims dims, int brick_h, int brick_w, int mortar, double jitter, std::uint64_t seed) {
    std::mt19937_64 rng = substream(seed, 0xb41c, 0);
    std::uniform_real_distribution<double> u(-jitter, jitter);
    const int course_rows = dims.rows / brick_h + 2, course_cols = dims.cols / brick_w + 3;
    std::vector<double> shade(static_cast<std::size_t>(course_rows) * course_cols);
    for (double& s : shade) s = 0.7 + u(rng);
    const double mortar_v = 0.25;
    return supersample(dims, [&](double r, double c) {
        const double rr = r + 0.5, cc = c + 0.5;
        const int course = static_cast<int>(std::floor(rr / brick_h));
        const double offset = (course & 1) ? brick_w / 2.0 : 0.0;
        const double x = cc + offset;
        const int col = static_cast<int>(std::floor(x / brick_w));
        const double in_r = rr - course * brick_h, in_c = x - col * brick_w;
        if (in_r < mortar || in_c < mortar) return mortar_v;
        const int ci = std::clamp(course, 0, course_rows - 1), cj = std::clamp(col, 0, course_cols - 1);
        return shade[static_cast<std::size_t>(ci) * course_cols + cj];
    });
}

Image random_texture(Dims dims, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> family(0, 4);
    std::uniform_real_distribution<double> angle(0.0, 180.0), phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> contrast(0.4, 0.9);
    switch (family(rng)) {
        case 0: {
            std::uniform_real_distribution<double> period(3.0, 12.0);
            return grating(dims, period(rng), angle(rng), phase(rng), contrast(rng));
        }
        case 1: {
            std::uniform_real_distribution<double> cell(3.0, 10.0);
            return checker(dims, cell(rng), angle(rng), contrast(rng));
        }
        case 2: {
            std::uniform_int_distribution<int> count(4, 14);
            return disks(dims, count(rng), rng);
        }
        case 3: {
            std::uniform_real_distribution<double> sigma(1.0, 3.0);
            return smooth_noise(dims, sigma(rng), rng);
        }
        default: {
            std::uniform_real_distribution<double> period(4.0, 10.0);
            const Image a = grating(dims, period(rng), angle(rng), phase(rng), contrast(rng));
            const Image b = disks(dims, 6, rng);
            Image out(dims);
            for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] = 0.5 * (a.pixels()[i] + b.pixels()[i]);
            return out;
        }
    }
}

std::vector<Image> texture_corpus(int count, Dims dims, std::uint64_t seed) {
    std::vector<Image> out;
    out.reserve(std::max(count, 0));
    for (int i = 0; i < count; ++i) {
        std::mt19937_64 rng = substream(seed, 0x7e47, static_cast<std::uint64_t>(i));
        out.push_back(random_texture(dims, rng));
    }
    return out;
}

}  // namespace djsr::synth
