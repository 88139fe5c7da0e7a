#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "djsr/image.hpp"
#include "djsr/tensor.hpp"

namespace djsr {

struct LayerSpec {
    int kernel = 5;
    int channels = 1;  // output channels
    bool operator==(const LayerSpec&) const = default;
};

enum class InitScheme { identity, random };

struct SdcaeConfig {
    // Encoder 9x9x64, 5x5x32; decoder 5x5x32, 5x5x1. Hidden layers are
    // zero-bias ReLU, the last layer is linear.
    std::vector<LayerSpec> layers{{9, 64}, {5, 32}, {5, 32}, {5, 1}};
    double corruption_sigma = 0.05;
    double scale = 1.2;
    double learning_rate = 0.01;
    double momentum = 0.9;
    int epochs = 10;
    int batch_size = 64;
    std::uint64_t seed = 1;
    int sub_image = 33;
    int sub_image_stride = 14;
    int augmentations = 1;  // augmented copies per corpus image, besides the original
    double norm_floor = 1e-2;
    InitScheme init = InitScheme::identity;
    double init_noise = 0.01;  // relative to the He scale

    // Small network used for desk-scale experiments and tests.
    static SdcaeConfig desk();

    bool operator==(const SdcaeConfig&) const = default;
};

void validate(const SdcaeConfig& config);

struct ModelParams {
    std::vector<ConvLayer> layers;
    SdcaeConfig config;
    int epochs_seen = 0;
    std::uint64_t corpus_hash = 0;
    bool finetuned = false;
    std::uint64_t source_hash = 0;

    // Total spatial shrinkage per axis: sum of (k - 1).
    int border_trim() const;
    bool operator==(const ModelParams&) const = default;
};

ModelParams init_model(const SdcaeConfig& config);

// Normalized LR/HR training example. The target covers the network's central
// output extent; both are scaled with the input window's statistics.
struct TrainingPair {
    Image input;
    Image target;
    double mean = 0.0;
    double magnitude = 1.0;
};

struct TrainingSet {
    std::vector<TrainingPair> pairs;
    int skipped_images = 0;
};

// Adds i.i.d. N(0, sigma^2) noise. No clamping.
Image corrupt(const Image& image, double sigma, std::mt19937_64& rng);

struct AugmentParams {
    int shift_rows = 0;
    int shift_cols = 0;
    double angle_deg = 0.0;
    double zoom = 1.0;
};

struct AugmentedImage {
    Image image;
    // Origin of the crop in the input frame.
    int row0 = 0;
    int col0 = 0;
};

AugmentParams sample_augment(std::mt19937_64& rng);

// Warps with shift, rotation and zoom about the image center (bilinear) and
// crops to the largest box whose pixels all map inside the input.
AugmentedImage apply_augment(const Image& image, const AugmentParams& params);
Image augment(const Image& image, std::mt19937_64& rng);

// Number of sub-image windows along an axis of length n.
int window_count(int n, int window, int stride);

TrainingSet make_training_pairs(const std::vector<Image>& corpus, const SdcaeConfig& config,
                                int border_trim, int threads = 1);

struct PretrainResult {
    ModelParams model;
    std::vector<double> epoch_loss;
};

PretrainResult pretrain(const std::vector<TrainingPair>& pairs, const SdcaeConfig& config,
                        std::uint64_t corpus_hash = 0, int threads = 1);

// Continues training an existing model for config.epochs more epochs.
PretrainResult continue_training(ModelParams model, const std::vector<TrainingPair>& pairs,
                                 int threads = 1);

// Runs the network over an image already on the HR grid. Works in
// overlapping windows of config.sub_image pixels; each window is normalized
// on its own and overlapping outputs are averaged. Output dims are the input
// dims minus the border trim.
Image apply_network(const ModelParams& model, const Image& upsampled);

// Same tiling, with the model for each tile picked from its normalized input.
// Every candidate model must share `layout`'s architecture.
using TileChooser = std::function<const ModelParams&(const Image& normalized_tile)>;
Image apply_network_with(const ModelParams& layout, const Image& upsampled, const TileChooser& choose);

// Bicubic upscale by the model's factor, then the network. Output dims are
// ceil(dims * s) - trim per axis.
Image forward_sr(const ModelParams& model, const Image& lr);

Tensor to_tensor(const Image& image);
Image from_tensor(const Tensor& tensor);

std::string to_string(InitScheme scheme);
InitScheme init_scheme_from_string(const std::string& name);

}  // namespace djsr
