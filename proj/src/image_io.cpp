#include "djsr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

namespace djsr {

namespace fs = std::filesystem;

namespace {

std::string lower_ext(const fs::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return ext;
}

unsigned char to_byte(double v) {
    return static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct FileCloser {
    void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

// libpng reports through these instead of printing; the setjmp handlers
// turn the jump into a categorized error.
void png_quiet_error(png_structp png, png_const_charp) { png_longjmp(png, 1); }
void png_quiet_warning(png_structp, png_const_charp) {}

ColorImage read_png(const fs::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) fail(ErrorKind::io, "cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_quiet_error, png_quiet_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::io, "libpng init failed for " + path.string());
    }
    std::vector<unsigned char> buffer;
    std::vector<png_bytep> rows;
    png_uint_32 width = 0, height = 0;
    int channels = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        fail(ErrorKind::format, "malformed PNG " + path.string());
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    width = png_get_image_width(png, info);
    height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    if (png_get_bit_depth(png, info) == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && png_get_bit_depth(png, info) < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    buffer.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 r = 0; r < height; ++r) rows[r] = buffer.data() + r * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    const int h = static_cast<int>(height), w = static_cast<int>(width);
    ColorImage out;
    if (channels == 1) {
        out.space = ColorSpace::gray;
        out.planes.emplace_back(h, w);
    } else if (channels == 3) {
        out.space = ColorSpace::rgb;
        for (int k = 0; k < 3; ++k) out.planes.emplace_back(h, w);
    } else {
        fail(ErrorKind::format, "unsupported PNG channel count in " + path.string());
    }
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int k = 0; k < channels; ++k)
                out.planes[k](r, c) = buffer[r * stride + c * channels + k] / 255.0;
    return out;
}

void write_png(const fs::path& path, const ColorImage& image) {
    const int channels = static_cast<int>(image.planes.size());
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) fail(ErrorKind::io, "cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_quiet_error, png_quiet_warning);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorKind::io, "libpng init failed for " + path.string());
    }
    std::vector<unsigned char> buffer;
    std::vector<png_bytep> rows;
    {
        const int h = image.rows(), w = image.cols();
        buffer.resize(static_cast<std::size_t>(h) * w * channels);
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c)
                for (int k = 0; k < channels; ++k)
                    buffer[(static_cast<std::size_t>(r) * w + c) * channels + k] =
                        to_byte(image.planes[k](r, c));
        rows.resize(h);
        for (int r = 0; r < h; ++r) rows[r] = buffer.data() + static_cast<std::size_t>(r) * w * channels;
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        fail(ErrorKind::io, "PNG write failed for " + path.string());
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, image.cols(), image.rows(), 8, channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

// Next whitespace-separated header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
    std::string tok;
    char ch;
    while (in.get(ch)) {
        if (ch == '#') {
            std::string dummy;
            std::getline(in, dummy);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(ch);
    }
    return tok;
}

ColorImage read_pnm(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::io, "cannot open " + path.string());
    const std::string magic = pnm_token(in);
    if (magic != "P5" && magic != "P2" && magic != "P6")
        fail(ErrorKind::format, "unsupported PNM magic '" + magic + "' in " + path.string());
    int w = 0, h = 0, maxval = 0;
    try {
        w = std::stoi(pnm_token(in));
        h = std::stoi(pnm_token(in));
        maxval = std::stoi(pnm_token(in));
    } catch (const std::exception&) {
        fail(ErrorKind::format, "malformed PNM header in " + path.string());
    }
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        fail(ErrorKind::format, "invalid PNM header values in " + path.string());
    const int channels = magic == "P6" ? 3 : 1;
    ColorImage out;
    out.space = channels == 3 ? ColorSpace::rgb : ColorSpace::gray;
    for (int k = 0; k < channels; ++k) out.planes.emplace_back(h, w);
    const std::size_t count = static_cast<std::size_t>(w) * h * channels;
    std::vector<double> values(count);
    if (magic == "P2") {
        for (auto& v : values) {
            int x;
            if (!(in >> x)) fail(ErrorKind::format, "truncated PGM data in " + path.string());
            v = x;
        }
    } else {
        const int bytes = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(count * bytes);
        if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size())))
            fail(ErrorKind::format, "truncated PNM data in " + path.string());
        for (std::size_t i = 0; i < count; ++i)
            values[i] = bytes == 2 ? (raw[2 * i] << 8 | raw[2 * i + 1]) : raw[i];
    }
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int k = 0; k < channels; ++k)
                out.planes[k](r, c) =
                    values[(static_cast<std::size_t>(r) * w + c) * channels + k] / maxval;
    return out;
}

void write_pnm(const fs::path& path, const ColorImage& image) {
    const int channels = static_cast<int>(image.planes.size());
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(ErrorKind::io, "cannot write " + path.string());
    out << (channels == 1 ? "P5" : "P6") << "\n" << image.cols() << " " << image.rows() << "\n255\n";
    std::vector<unsigned char> raw(static_cast<std::size_t>(image.rows()) * image.cols() * channels);
    std::size_t i = 0;
    for (int r = 0; r < image.rows(); ++r)
        for (int c = 0; c < image.cols(); ++c)
            for (int k = 0; k < channels; ++k) raw[i++] = to_byte(image.planes[k](r, c));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

}  // namespace

bool is_image_path(const fs::path& path) {
    const std::string ext = lower_ext(path);
    return ext == ".png" || ext == ".pgm" || ext == ".ppm" || ext == ".pnm";
}

ColorImage read_image(const fs::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
    fail(ErrorKind::format, "unsupported image extension: " + path.string());
}

void write_image(const fs::path& path, const ColorImage& image) {
    if (image.planes.empty()) fail(ErrorKind::invalid_argument, "write_image: empty image");
    const ColorImage& src = image;
    ColorImage converted;
    const ColorImage* out = &src;
    if (image.space == ColorSpace::ycbcr) {
        converted = ycbcr_to_rgb(image);
        out = &converted;
    }
    const std::string ext = lower_ext(path);
    if (ext == ".png") return write_png(path, *out);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
        if (ext == ".pgm" && out->planes.size() != 1)
            fail(ErrorKind::invalid_argument, "PGM output requires a gray image: " + path.string());
        return write_pnm(path, *out);
    }
    fail(ErrorKind::format, "unsupported image extension: " + path.string());
}

void write_image(const fs::path& path, const Image& gray) {
    write_image(path, ColorImage::gray(gray));
}

Image read_luma(const fs::path& path) { return to_luma(read_image(path)).y; }

std::vector<fs::path> list_images(const fs::path& dir) {
    if (!fs::is_directory(dir)) fail(ErrorKind::io, "not a directory: " + dir.string());
    std::vector<fs::path> out;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && is_image_path(entry.path())) out.push_back(entry.path());
    std::sort(out.begin(), out.end());
    return out;
}

Image quantize8(const Image& image) {
    Image out = image;
    for (double& v : out.pixels()) v = to_byte(v) / 255.0;
    return out;
}

}  // namespace djsr
