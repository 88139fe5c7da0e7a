#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "djsr/sdcae.hpp"
#include "djsr/self_similarity.hpp"

namespace djsr {

enum class WeightMode {
    full,           // delta <- w * (momentum * delta - lr * grad)
    gradient_only,  // delta <- momentum * delta - w * lr * grad
};

struct FinetuneConfig {
    double learning_rate = 0.5;
    double momentum = 0.9;
    int epochs = 1;
    std::uint64_t seed = 1;
    bool use_weights = true;
    WeightMode mode = WeightMode::full;
    bool reset_momentum = true;
    std::size_t max_pairs = 0;  // 0 uses the whole pool; otherwise a seeded subset

    bool operator==(const FinetuneConfig&) const = default;
};

void validate(const FinetuneConfig& config);

// One pair ready for the network: normalized input context and target.
struct FinetuneSample {
    Tensor input;
    Tensor target;
    double weight = 1.0;
};

FinetuneSample make_sample(const ModelParams& model, const SelfExampleSet& set,
                           const SelfExamplePair& pair);

// Applies one weighted update in place. Returns false, leaving the model
// untouched, when the loss or a gradient is not finite.
bool wbp_step(ModelParams& model, const FinetuneSample& sample, const FinetuneConfig& config,
              double* loss = nullptr);

struct FinetuneLog {
    std::vector<double> epoch_loss;  // weighted mean loss per epoch
    std::size_t steps = 0;
    std::size_t skipped = 0;
    double weight_sum = 0.0;
    std::vector<std::string> warnings;
};

struct FinetuneResult {
    ModelParams model;
    FinetuneLog log;
};

// Sequential per-pair passes over `indices` into set.pairs (all pairs when
// empty is passed via the overload below).
FinetuneResult finetune(ModelParams model, const SelfExampleSet& set,
                        std::span<const std::size_t> indices, const FinetuneConfig& config);
FinetuneResult finetune(ModelParams model, const SelfExampleSet& set, const FinetuneConfig& config);

std::string to_string(WeightMode mode);
WeightMode weight_mode_from_string(const std::string& name);

}  // namespace djsr
