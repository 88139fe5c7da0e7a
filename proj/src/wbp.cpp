#include "djsr/wbp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "djsr/network.hpp"
#include "djsr/random.hpp"

namespace djsr {

void validate(const FinetuneConfig& c) {
    if (!(c.learning_rate > 0.0)) fail(ErrorKind::invalid_argument, "fine-tune learning rate must be > 0");
    if (!(c.momentum >= 0.0 && c.momentum < 1.0))
        fail(ErrorKind::invalid_argument, "momentum must be in [0, 1)");
    if (c.epochs < 0) fail(ErrorKind::invalid_argument, "fine-tune epochs must be >= 0");
}

std::string to_string(WeightMode mode) { return mode == WeightMode::full ? "full" : "gradient"; }

WeightMode weight_mode_from_string(const std::string& name) {
    if (name == "full") return WeightMode::full;
    if (name == "gradient") return WeightMode::gradient_only;
    fail(ErrorKind::invalid_argument, "unknown weight mode '" + name + "'");
}

FinetuneSample make_sample(const ModelParams& model, const SelfExampleSet& set,
                           const SelfExamplePair& pair) {
    const int margin = model.border_trim() / 2;
    NormalizedPatch in = normalize_patch(set.query_context(pair, margin), model.config.norm_floor);
    FinetuneSample s;
    s.target = to_tensor(normalize_with(set.hr_patch(pair), in.mean, in.magnitude));
    s.input = to_tensor(in.data);
    s.weight = pair.weight;
    return s;
}

bool wbp_step(ModelParams& model, const FinetuneSample& sample, const FinetuneConfig& config,
              double* loss_out) {
    const double w = config.use_weights ? sample.weight : 1.0;
    if (!(w >= 0.0 && w <= 1.0))
        fail(ErrorKind::invalid_argument, "pair weight " + std::to_string(w) + " outside [0, 1]");
    const std::span<const ConvLayer> layers(model.layers);
    ForwardTrace<float> trace = network_forward(layers, sample.input);
    LossValue<float> loss = mse_loss(trace.output, sample.target);
    if (loss_out) *loss_out = loss.value;
    if (!std::isfinite(loss.value)) return false;
    const std::vector<ConvGradients<float>> grads = network_backward(layers, trace, std::move(loss.gradient));
    for (const auto& g : grads)
        if (!g.weights.all_finite() || !all_finite(std::span<const float>(g.bias))) return false;
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const std::span<const float> gb(grads[l].bias);
        if (config.mode == WeightMode::full)
            momentum_update(model.layers[l], grads[l].weights, gb, config.learning_rate, config.momentum, w);
        else
            momentum_update(model.layers[l], grads[l].weights, gb, w * config.learning_rate,
                            config.momentum, 1.0);
    }
    return true;
}

FinetuneResult finetune(ModelParams model, const SelfExampleSet& set,
                        std::span<const std::size_t> indices, const FinetuneConfig& config) {
    validate(config);
    FinetuneResult result;
    if (indices.empty()) {
        result.log.warnings.push_back("no self-example pairs; model left unchanged");
        result.model = std::move(model);
        return result;
    }
    if (config.reset_momentum)
        for (ConvLayer& l : model.layers) {
            std::fill(l.momentum.storage().begin(), l.momentum.storage().end(), 0.0f);
            std::fill(l.bias_momentum.begin(), l.bias_momentum.end(), 0.0f);
        }
    model.finetuned = true;
    model.source_hash = image_hash(set.source);
    std::vector<std::size_t> order(indices.begin(), indices.end());
    std::mt19937_64 rng = substream(config.seed, 0xf17e, 0);
    if (config.max_pairs > 0 && config.max_pairs < order.size()) {
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(config.max_pairs);
        std::sort(order.begin(), order.end());
    }
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double weighted = 0.0, weights = 0.0;
        for (std::size_t idx : order) {
            const FinetuneSample sample = make_sample(model, set, set.pairs.at(idx));
            double loss = 0.0;
            if (!wbp_step(model, sample, config, &loss)) {
                ++result.log.skipped;
                result.log.warnings.push_back("skipped pair " + std::to_string(idx) + ": non-finite gradient");
                continue;
            }
            const double w = config.use_weights ? sample.weight : 1.0;
            weighted += w * loss;
            weights += w;
            ++result.log.steps;
        }
        result.log.weight_sum += weights;
        result.log.epoch_loss.push_back(weights > 0.0 ? weighted / weights : 0.0);
    }
    result.model = std::move(model);
    return result;
}

FinetuneResult finetune(ModelParams model, const SelfExampleSet& set, const FinetuneConfig& config) {
    std::vector<std::size_t> all(set.pairs.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    return finetune(std::move(model), set, all, config);
}

}  // namespace djsr
