#include "djsr/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "djsr/checkpoint.hpp"
#include "djsr/image_io.hpp"
#include "djsr/resample.hpp"

namespace djsr {

namespace {

void require_same_dims(const Image& a, const Image& b, const char* what) {
    if (a.dims() != b.dims())
        fail(ErrorKind::shape_mismatch, std::string(what) + ": dims " + a.dims().str() + " vs " + b.dims().str());
}

// Valid-mode separable filter.
Image filter_valid(const Image& img, const std::vector<double>& k) {
    const int n = static_cast<int>(k.size());
    Image tmp(img.rows(), img.cols() - n + 1);
    for (int r = 0; r < tmp.rows(); ++r)
        for (int c = 0; c < tmp.cols(); ++c) {
            double acc = 0.0;
            for (int t = 0; t < n; ++t) acc += k[t] * img(r, c + t);
            tmp(r, c) = acc;
        }
    Image out(img.rows() - n + 1, tmp.cols());
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c) {
            double acc = 0.0;
            for (int t = 0; t < n; ++t) acc += k[t] * tmp(r + t, c);
            out(r, c) = acc;
        }
    return out;
}

Image scaled255(const Image& img) {
    Image out = img;
    for (double& v : out.pixels()) v *= 255.0;
    return out;
}

Image product(const Image& a, const Image& b) {
    Image out = a;
    for (std::size_t i = 0; i < out.size(); ++i) out.pixels()[i] *= b.pixels()[i];
    return out;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
    require_same_dims(a, b, "psnr");
    if (a.empty()) fail(ErrorKind::invalid_argument, "psnr of empty images");
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = 255.0 * (a.pixels()[i] - b.pixels()[i]);
        sum += d * d;
    }
    const double mse = sum / static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

double ssim(const Image& a, const Image& b) {
    require_same_dims(a, b, "ssim");
    if (a.rows() < 11 || a.cols() < 11)
        fail(ErrorKind::invalid_argument, "ssim needs at least 11x11 images, got " + a.dims().str());
    const std::vector<double> k = gaussian_kernel(11, 1.5);
    const Image x = scaled255(a), y = scaled255(b);
    const Image mx = filter_valid(x, k), my = filter_valid(y, k);
    const Image xx = filter_valid(product(x, x), k), yy = filter_valid(product(y, y), k);
    const Image xy = filter_valid(product(x, y), k);
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    double sum = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
        const double ux = mx.pixels()[i], uy = my.pixels()[i];
        const double vx = xx.pixels()[i] - ux * ux;
        const double vy = yy.pixels()[i] - uy * uy;
        const double cxy = xy.pixels()[i] - ux * uy;
        sum += ((2.0 * ux * uy + c1) * (2.0 * cxy + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
    }
    return sum / static_cast<double>(mx.size());
}

Image crop_border(const Image& image, int border) {
    if (border <= 0) return image;
    if (image.rows() <= 2 * border || image.cols() <= 2 * border)
        fail(ErrorKind::invalid_argument, "border " + std::to_string(border) + " leaves nothing of " + image.dims().str());
    return image.crop(border, border, image.rows() - 2 * border, image.cols() - 2 * border);
}

int cascade_passes(double s, double s_t) {
    if (!(s > 1.0)) fail(ErrorKind::invalid_argument, "per-pass factor s must be > 1");
    if (!(s_t >= 1.0)) fail(ErrorKind::invalid_argument, "target factor must be >= 1, got " + std::to_string(s_t));
    int n = 0;
    double reach = 1.0;
    while (reach < s_t * (1.0 - 1e-9)) {
        reach *= s;
        ++n;
    }
    return n;
}

Image network_pass(const SrModels& models, const Image& image) {
    const int trim = models.border_trim();
    const Image up = resize_bicubic(image, ceil_dims(image.dims(), models.scale()));
    const Image padded = reflect_pad(up, trim / 2, trim / 2, trim / 2, trim / 2);
    Image out = models.clusters ? apply_submodels(*models.clusters, padded) : apply_network(models.single, padded);
    return clamp01(std::move(out));
}

SrModels self_tune(SrModels models, const Image& y, const SelfTuneOptions& options, SrReport* report,
                   int threads) {
    SelfExampleParams params = options.examples;
    params.scale = models.scale();
    const SelfExampleSet set = generate_self_examples(y, params, threads);
    std::vector<std::string> warnings;
    if (models.clusters) {
        RoutedFinetune r = finetune_submodels(std::move(*models.clusters), set, options.finetune);
        models.clusters = std::move(r.model);
        for (const auto& log : r.logs) warnings.insert(warnings.end(), log.warnings.begin(), log.warnings.end());
    } else {
        FinetuneResult r = finetune(std::move(models.single), set, options.finetune);
        models.single = std::move(r.model);
        warnings = std::move(r.log.warnings);
    }
    if (report) {
        report->self_pairs = set.pairs.size();
        if (!set.pairs.empty()) report->volume = effective_volume(set.pairs);
        report->warnings.insert(report->warnings.end(), warnings.begin(), warnings.end());
    }
    return models;
}

Image upscale_luma(const SrModels& models, const Image& y, Dims target, SrReport* report) {
    if (target.rows < y.rows() || target.cols < y.cols())
        fail(ErrorKind::invalid_argument, "target " + target.str() + " is smaller than the input " + y.dims().str());
    const double ratio = std::max(static_cast<double>(target.rows) / y.rows(),
                                  static_cast<double>(target.cols) / y.cols());
    const int passes = cascade_passes(models.scale(), ratio);
    Image cur = y;
    for (int p = 0; p < passes; ++p) cur = network_pass(models, cur);
    if (cur.dims() != target) cur = resize_bicubic(cur, target);
    if (report) {
        report->passes = passes;
        report->output = target;
    }
    return cur;
}

ColorImage upscale_color(const SrModels& models, const ColorImage& image, double s_t, SrReport* report) {
    if (!(s_t >= 1.0)) fail(ErrorKind::invalid_argument, "target factor must be >= 1, got " + std::to_string(s_t));
    LumaSplit split = to_luma(image);
    const Dims target = scaled_dims(split.y.dims(), s_t);
    split.y = upscale_luma(models, split.y, target, report);
    if (!split.cb.empty()) {
        split.cb = resize_bicubic(split.cb, target);
        split.cr = resize_bicubic(split.cr, target);
    }
    return from_luma(split);
}

void validate(const SrJob& job) {
    if (!(job.target_scale >= 1.0))
        fail(ErrorKind::invalid_argument, "target factor s_t must be >= 1, got " + std::to_string(job.target_scale));
    if (job.input.empty() || job.output.empty()) fail(ErrorKind::invalid_argument, "sr needs input and output paths");
    if (job.model.empty() == job.clusters.empty())
        fail(ErrorKind::invalid_argument, "sr needs exactly one of a checkpoint or a cluster manifest");
}

SrModels load_models(const SrJob& job) {
    SrModels m;
    if (!job.clusters.empty()) {
        m.clusters = load_cluster_manifest(job.clusters);
        if (m.clusters->models.empty()) fail(ErrorKind::format, job.clusters.string() + ": manifest has no sub-models");
    } else {
        m.single = load_checkpoint(job.model);
    }
    return m;
}

SrReport run_sr(const SrJob& job, int threads) {
    validate(job);
    SrReport report;
    const ColorImage in = read_image(job.input);
    auto ext = [](const std::filesystem::path& p) {
        std::string e = p.extension().string();
        std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
        return e;
    };
    if (job.target_scale == 1.0 && ext(job.input) == ext(job.output)) {
        std::filesystem::copy_file(job.input, job.output, std::filesystem::copy_options::overwrite_existing);
        report.output = in.dims();
        return report;
    }
    SrModels models = load_models(job);
    if (job.tune.enabled) models = self_tune(std::move(models), to_luma(in).y, job.tune, &report, threads);
    write_image(job.output, upscale_color(models, in, job.target_scale, &report));
    return report;
}

EvalRow evaluate(const Image& reference, const Image& test, int border, std::string image, std::string method,
                 double target_scale) {
    require_same_dims(reference, test, "evaluate");
    const Image a = crop_border(reference, border), b = crop_border(test, border);
    return {std::move(image), std::move(method), target_scale, psnr(a, b), ssim(a, b)};
}

std::string format_metric(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", value);
    return buf;
}

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows) {
    out << "image,method,s_t,psnr,ssim\n";
    for (const EvalRow& r : rows) {
        char st[32];
        std::snprintf(st, sizeof st, "%g", r.target_scale);
        out << r.image << ',' << r.method << ',' << st << ',' << format_metric(r.psnr) << ',' << format_metric(r.ssim)
            << '\n';
    }
}

void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows) {
    std::ofstream f(path);
    if (!f) fail(ErrorKind::io, "cannot write " + path.string());
    write_eval_csv(f, rows);
    if (!f) fail(ErrorKind::io, "error writing " + path.string());
}

Image degrade(const Image& hr, double s_t) {
    if (!(s_t >= 1.0)) fail(ErrorKind::invalid_argument, "degrade factor must be >= 1");
    return resize_bicubic(hr, scaled_dims(hr.dims(), 1.0 / s_t));
}

}  // namespace djsr
