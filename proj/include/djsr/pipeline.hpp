#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "djsr/color.hpp"
#include "djsr/sdcae.hpp"
#include "djsr/self_similarity.hpp"
#include "djsr/submodels.hpp"
#include "djsr/wbp.hpp"

namespace djsr {

// Metrics on [0, 1] luminance scaled to 8-bit range (peak 255).
double psnr(const Image& a, const Image& b);
// Mean local SSIM over all valid 11x11 Gaussian windows (sigma 1.5).
double ssim(const Image& a, const Image& b);

Image crop_border(const Image& image, int border);

// Fewest factor-s passes reaching s_t.
int cascade_passes(double s, double s_t);

// Either a single network or routed sub-models.
struct SrModels {
    ModelParams single;
    std::optional<ClusterModel> clusters;

    const ModelParams& layout() const { return clusters ? clusters->models.front() : single; }
    double scale() const { return layout().config.scale; }
    int border_trim() const { return layout().border_trim(); }
};

// One network step: bicubic to ceil(dims * s), reflect-pad by half the trim
// so the output keeps that size, run the network(s), clamp to [0, 1].
Image network_pass(const SrModels& models, const Image& image);

struct SelfTuneOptions {
    bool enabled = false;
    SelfExampleParams examples;
    FinetuneConfig finetune;
};

struct SrReport {
    int passes = 0;
    Dims output;
    std::size_t self_pairs = 0;
    EffectiveVolume volume;
    std::vector<std::string> warnings;
};

// Adapts the models to `y` on its own self-examples.
SrModels self_tune(SrModels models, const Image& y, const SelfTuneOptions& options, SrReport* report = nullptr,
                   int threads = 1);

// Cascades network passes until the image reaches `target`, then resizes
// to exactly `target`.
Image upscale_luma(const SrModels& models, const Image& y, Dims target, SrReport* report = nullptr);

// Network on luminance only; chroma is resized once with bicubic.
ColorImage upscale_color(const SrModels& models, const ColorImage& image, double s_t,
                         SrReport* report = nullptr);

struct SrJob {
    std::filesystem::path input;
    std::filesystem::path output;
    double target_scale = 2.0;
    std::filesystem::path model;       // checkpoint, or
    std::filesystem::path clusters;    // cluster manifest
    SelfTuneOptions tune;
};

void validate(const SrJob& job);
SrModels load_models(const SrJob& job);
SrReport run_sr(const SrJob& job, int threads = 1);

struct EvalRow {
    std::string image;
    std::string method;
    double target_scale = 1.0;
    double psnr = 0.0;
    double ssim = 0.0;
};

// PSNR and SSIM after removing `border` pixels on every side.
EvalRow evaluate(const Image& reference, const Image& test, int border, std::string image,
                 std::string method, double target_scale);

void write_eval_csv(std::ostream& out, const std::vector<EvalRow>& rows);
void write_eval_csv(const std::filesystem::path& path, const std::vector<EvalRow>& rows);
std::string format_metric(double value);

// Bicubic LR version of a ground-truth image at round(dims / s_t).
Image degrade(const Image& hr, double s_t);

}  // namespace djsr
