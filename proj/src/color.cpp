#include "djsr/color.hpp"

#include <tuple>

namespace djsr {

namespace {

void require_planes(const ColorImage& image, std::size_t n, const char* what) {
    if (image.planes.size() != n)
        fail(ErrorKind::invalid_argument, std::string(what) + ": expected " + std::to_string(n) +
                                              " planes, got " + std::to_string(image.planes.size()));
    for (const Image& p : image.planes)
        if (p.dims() != image.planes.front().dims())
            fail(ErrorKind::shape_mismatch, std::string(what) + ": plane dims differ");
}

}  // namespace

ColorImage rgb_to_ycbcr(const ColorImage& rgb) {
    if (rgb.space != ColorSpace::rgb) fail(ErrorKind::invalid_argument, "rgb_to_ycbcr: input not RGB");
    require_planes(rgb, 3, "rgb_to_ycbcr");
    const Dims d = rgb.dims();
    ColorImage out{{Image(d), Image(d), Image(d)}, ColorSpace::ycbcr};
    const auto& [R, G, B] = std::tie(rgb.planes[0], rgb.planes[1], rgb.planes[2]);
    for (int r = 0; r < d.rows; ++r)
        for (int c = 0; c < d.cols; ++c) {
            const double red = R(r, c), green = G(r, c), blue = B(r, c);
            out.planes[0](r, c) = 0.299 * red + 0.587 * green + 0.114 * blue;
            out.planes[1](r, c) = 0.5 - 0.168735892 * red - 0.331264108 * green + 0.5 * blue;
            out.planes[2](r, c) = 0.5 + 0.5 * red - 0.418687589 * green - 0.081312411 * blue;
        }
    return out;
}

ColorImage ycbcr_to_rgb(const ColorImage& ycc) {
    if (ycc.space != ColorSpace::ycbcr)
        fail(ErrorKind::invalid_argument, "ycbcr_to_rgb: input not YCbCr");
    require_planes(ycc, 3, "ycbcr_to_rgb");
    const Dims d = ycc.dims();
    ColorImage out{{Image(d), Image(d), Image(d)}, ColorSpace::rgb};
    for (int r = 0; r < d.rows; ++r)
        for (int c = 0; c < d.cols; ++c) {
            const double y = ycc.planes[0](r, c);
            const double cb = ycc.planes[1](r, c) - 0.5;
            const double cr = ycc.planes[2](r, c) - 0.5;
            out.planes[0](r, c) = y + 1.402 * cr;
            out.planes[1](r, c) = y - 0.344136286 * cb - 0.714136286 * cr;
            out.planes[2](r, c) = y + 1.772 * cb;
        }
    return out;
}

LumaSplit to_luma(const ColorImage& image) {
    switch (image.space) {
        case ColorSpace::gray:
            require_planes(image, 1, "to_luma");
            return {image.planes[0], {}, {}};
        case ColorSpace::rgb: {
            ColorImage ycc = rgb_to_ycbcr(image);
            return {std::move(ycc.planes[0]), std::move(ycc.planes[1]), std::move(ycc.planes[2])};
        }
        case ColorSpace::ycbcr:
            require_planes(image, 3, "to_luma");
            return {image.planes[0], image.planes[1], image.planes[2]};
    }
    fail(ErrorKind::invalid_argument, "to_luma: unknown color space");
}

ColorImage from_luma(const LumaSplit& split) {
    if (split.cb.empty() && split.cr.empty()) return ColorImage::gray(split.y);
    return ycbcr_to_rgb(merge_luma(split.y, split.cb, split.cr));
}

ColorImage merge_luma(Image y, const Image& cb, const Image& cr) {
    if (y.dims() != cb.dims() || y.dims() != cr.dims())
        fail(ErrorKind::shape_mismatch, "merge_luma: luma " + y.dims().str() + " vs chroma " +
                                            cb.dims().str() + "/" + cr.dims().str());
    return {{std::move(y), cb, cr}, ColorSpace::ycbcr};
}

}  // namespace djsr
