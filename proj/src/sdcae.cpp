#include "djsr/sdcae.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "djsr/network.hpp"
#include "djsr/parallel.hpp"
#include "djsr/random.hpp"
#include "djsr/resample.hpp"

namespace djsr {

SdcaeConfig SdcaeConfig::desk() {
    SdcaeConfig c;
    c.layers = {{5, 16}, {5, 1}};
    c.epochs = 30;
    c.batch_size = 16;
    return c;
}

void validate(const SdcaeConfig& c) {
    if (c.layers.empty()) fail(ErrorKind::invalid_argument, "network needs at least one layer");
    for (const LayerSpec& l : c.layers)
        if (l.kernel <= 0 || l.kernel % 2 == 0 || l.channels <= 0)
            fail(ErrorKind::invalid_argument, "layer kernels must be odd and positive, channels > 0");
    if (c.layers.back().channels != 1)
        fail(ErrorKind::invalid_argument, "last layer must produce a single channel");
    if (!(c.scale > 1.0)) fail(ErrorKind::invalid_argument, "scale factor s must be > 1");
    if (!(c.learning_rate > 0.0)) fail(ErrorKind::invalid_argument, "pretrain learning rate must be > 0");
    if (!(c.momentum >= 0.0 && c.momentum < 1.0))
        fail(ErrorKind::invalid_argument, "momentum must be in [0, 1)");
    if (c.corruption_sigma < 0.0) fail(ErrorKind::invalid_argument, "corruption sigma must be >= 0");
    if (c.epochs < 0 || c.batch_size < 1) fail(ErrorKind::invalid_argument, "epochs >= 0, batch >= 1");
    if (c.sub_image < 1 || c.sub_image_stride < 1)
        fail(ErrorKind::invalid_argument, "sub-image size and stride must be positive");
    if (c.augmentations < 0) fail(ErrorKind::invalid_argument, "augmentations must be >= 0");
    if (!(c.norm_floor > 0.0)) fail(ErrorKind::invalid_argument, "normalization floor must be > 0");
    int trim = 0;
    for (const LayerSpec& l : c.layers) trim += l.kernel - 1;
    if (trim >= c.sub_image)
        fail(ErrorKind::invalid_argument, "sub-image " + std::to_string(c.sub_image) +
                                              " does not exceed border trim " + std::to_string(trim));
}

int ModelParams::border_trim() const {
    int trim = 0;
    for (const ConvLayer& l : layers)
        trim += static_cast<int>(l.kernel_rows()) - 1;
    return trim;
}

std::string to_string(InitScheme scheme) {
    return scheme == InitScheme::identity ? "identity" : "random";
}

InitScheme init_scheme_from_string(const std::string& name) {
    if (name == "identity") return InitScheme::identity;
    if (name == "random") return InitScheme::random;
    fail(ErrorKind::invalid_argument, "unknown init scheme '" + name + "'");
}

ModelParams init_model(const SdcaeConfig& config) {
    validate(config);
    ModelParams model;
    model.config = config;
    std::mt19937_64 rng = substream(config.seed, 0x1a17, 0);
    std::normal_distribution<double> normal(0.0, 1.0);
    int in_ch = 1;
    const std::size_t n_layers = config.layers.size();
    // Identity needs two channels to carry relu(x) and relu(-x).
    const bool identity =
        config.init == InitScheme::identity &&
        std::all_of(config.layers.begin(), config.layers.end() - 1,
                    [](const LayerSpec& l) { return l.channels >= 2; });
    for (std::size_t l = 0; l < n_layers; ++l) {
        const LayerSpec& spec = config.layers[l];
        const bool last = l + 1 == n_layers;
        ConvLayer layer(spec.channels, in_ch, spec.kernel, spec.kernel, true, !last);
        const double fan_in = static_cast<double>(in_ch) * spec.kernel * spec.kernel;
        const double he = std::sqrt((last ? 1.0 : 2.0) / fan_in);
        const double std_dev = identity ? config.init_noise * he : he;
        for (float& w : layer.weights.storage()) w = static_cast<float>(std_dev * normal(rng));
        if (identity) {
            const std::size_t mid = spec.kernel / 2;
            if (n_layers == 1) {
                layer.weights(0, 0, mid, mid) += 1.0f;
            } else if (l == 0) {
                layer.weights(0, 0, mid, mid) += 1.0f;
                layer.weights(1, 0, mid, mid) -= 1.0f;
            } else if (last) {
                layer.weights(0, 0, mid, mid) += 1.0f;
                layer.weights(0, 1, mid, mid) -= 1.0f;
            } else {
                layer.weights(0, 0, mid, mid) += 1.0f;
                layer.weights(1, 1, mid, mid) += 1.0f;
            }
        }
        model.layers.push_back(std::move(layer));
        in_ch = spec.channels;
    }
    return model;
}

Image corrupt(const Image& image, double sigma, std::mt19937_64& rng) {
    if (sigma < 0.0) fail(ErrorKind::invalid_argument, "corruption sigma must be >= 0");
    if (sigma == 0.0) return image;
    std::normal_distribution<double> noise(0.0, sigma);
    Image out = image;
    for (double& v : out.pixels()) v += noise(rng);
    return out;
}

AugmentParams sample_augment(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> shift(-4, 4);
    std::uniform_real_distribution<double> angle(-10.0, 10.0);
    std::uniform_real_distribution<double> log_zoom(-std::log(1.2), std::log(1.2));
    AugmentParams p;
    p.shift_rows = shift(rng);
    p.shift_cols = shift(rng);
    p.angle_deg = angle(rng);
    p.zoom = std::exp(log_zoom(rng));
    return p;
}

AugmentedImage apply_augment(const Image& image, const AugmentParams& p) {
    if (image.rows() < 2 || image.cols() < 2)
        fail(ErrorKind::invalid_argument, "augment: image " + image.dims().str() + " too small");
    if (!(p.zoom > 0.0)) fail(ErrorKind::invalid_argument, "augment: zoom must be positive");
    const double theta = p.angle_deg * std::numbers::pi / 180.0;
    const double cs = std::cos(theta), sn = std::sin(theta);
    const double ac = std::fabs(cs), as = std::fabs(sn);
    const double det = ac * ac - as * as;
    if (det <= 0.0) fail(ErrorKind::invalid_argument, "augment: rotation too large");
    const double half_r = (image.rows() - 1) / 2.0;
    const double half_c = (image.cols() - 1) / 2.0;
    const double a = p.zoom * (ac * half_r - as * half_c) / det;
    const double b = p.zoom * (ac * half_c - as * half_r) / det;
    constexpr double eps = 1e-9;
    const double center_r = half_r + p.shift_rows;
    const double center_c = half_c + p.shift_cols;
    const int r_lo = std::max(0, static_cast<int>(std::ceil(center_r - a - eps)));
    const int r_hi = std::min(image.rows() - 1, static_cast<int>(std::floor(center_r + a + eps)));
    const int c_lo = std::max(0, static_cast<int>(std::ceil(center_c - b - eps)));
    const int c_hi = std::min(image.cols() - 1, static_cast<int>(std::floor(center_c + b + eps)));
    if (a < 0.0 || b < 0.0 || r_hi < r_lo || c_hi < c_lo)
        fail(ErrorKind::invalid_argument,
             "augment: image " + image.dims().str() + " too small for the requested transform");

    AugmentedImage out;
    out.row0 = r_lo;
    out.col0 = c_lo;
    out.image = Image(r_hi - r_lo + 1, c_hi - c_lo + 1);
    for (int r = 0; r < out.image.rows(); ++r) {
        for (int c = 0; c < out.image.cols(); ++c) {
            // q - center - shift, rotated back and unzoomed, around the input center.
            const double x = (r + r_lo) - center_r;
            const double y = (c + c_lo) - center_c;
            const double sr = half_r + (cs * x + sn * y) / p.zoom;
            const double sc = half_c + (-sn * x + cs * y) / p.zoom;
            out.image(r, c) = sample_bilinear(image, sr, sc);
        }
    }
    return out;
}

Image augment(const Image& image, std::mt19937_64& rng) {
    return apply_augment(image, sample_augment(rng)).image;
}

int window_count(int n, int window, int stride) {
    if (n < window) return 0;
    return (n - window) / stride + 1;
}

namespace {

void extract_pairs(const Image& hr, const SdcaeConfig& config, int trim,
                   std::vector<TrainingPair>& out) {
    const Image lr = resize_bicubic(hr, scaled_dims(hr.dims(), 1.0 / config.scale));
    const Image up = resize_bicubic(lr, hr.dims());
    const int win = config.sub_image;
    const int inner = win - trim;
    const int nr = window_count(hr.rows(), win, config.sub_image_stride);
    const int nc = window_count(hr.cols(), win, config.sub_image_stride);
    for (int i = 0; i < nr; ++i) {
        for (int j = 0; j < nc; ++j) {
            const int r = i * config.sub_image_stride;
            const int c = j * config.sub_image_stride;
            NormalizedPatch in = normalize_patch(up.crop(r, c, win, win), config.norm_floor);
            TrainingPair pair;
            pair.target = normalize_with(hr.crop(r + trim / 2, c + trim / 2, inner, inner), in.mean,
                                         in.magnitude);
            pair.input = std::move(in.data);
            pair.mean = in.mean;
            pair.magnitude = in.magnitude;
            out.push_back(std::move(pair));
        }
    }
}

}  // namespace

TrainingSet make_training_pairs(const std::vector<Image>& corpus, const SdcaeConfig& config,
                                int border_trim, int threads) {
    validate(config);
    if (corpus.empty()) fail(ErrorKind::invalid_argument, "make_training_pairs: empty corpus");
    if (border_trim >= config.sub_image)
        fail(ErrorKind::invalid_argument, "border trim exceeds the sub-image size");
    std::vector<std::vector<TrainingPair>> per_image(corpus.size());
    std::vector<char> skipped(corpus.size(), 0);
    parallel_for(corpus.size(), threads, [&](std::size_t k) {
        const Image& img = corpus[k];
        if (img.rows() < config.sub_image || img.cols() < config.sub_image) {
            skipped[k] = 1;
            return;
        }
        extract_pairs(img, config, border_trim, per_image[k]);
        std::mt19937_64 rng = substream(config.seed, 0xa11, k);
        for (int a = 0; a < config.augmentations; ++a) {
            const AugmentParams params = sample_augment(rng);
            AugmentedImage aug;
            try {
                aug = apply_augment(img, params);
            } catch (const Error&) {
                continue;
            }
            if (aug.image.rows() >= config.sub_image && aug.image.cols() >= config.sub_image)
                extract_pairs(aug.image, config, border_trim, per_image[k]);
        }
    });
    TrainingSet set;
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        set.skipped_images += skipped[k];
        for (auto& p : per_image[k]) set.pairs.push_back(std::move(p));
    }
    return set;
}

Tensor to_tensor(const Image& image) {
    Tensor t(Shape4{1, 1, static_cast<std::size_t>(image.rows()), static_cast<std::size_t>(image.cols())});
    const auto px = image.pixels();
    for (std::size_t i = 0; i < px.size(); ++i) t[i] = static_cast<float>(px[i]);
    return t;
}

Image from_tensor(const Tensor& tensor) {
    const Shape4& s = tensor.shape();
    if (s.batch != 1 || s.channels != 1)
        fail(ErrorKind::shape_mismatch, "from_tensor expects a single plane, got " + s.str());
    Image img(static_cast<int>(s.rows), static_cast<int>(s.cols));
    for (std::size_t i = 0; i < tensor.size(); ++i) img.pixels()[i] = tensor[i];
    return img;
}

namespace {

struct SampleResult {
    std::vector<ConvGradients<float>> grads;
    double loss = 0.0;
};

}  // namespace

PretrainResult continue_training(ModelParams model, const std::vector<TrainingPair>& pairs,
                                 int threads) {
    const SdcaeConfig& config = model.config;
    validate(config);
    if (pairs.empty()) fail(ErrorKind::invalid_argument, "pretrain: no training pairs");
    PretrainResult result;
    std::mt19937_64 rng = substream(config.seed, 0x7a1, static_cast<std::uint64_t>(model.epochs_seen));
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::span<const ConvLayer> layers(model.layers);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_sum = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t count = std::min<std::size_t>(config.batch_size, order.size() - start);
            std::vector<Tensor> inputs(count);
            for (std::size_t b = 0; b < count; ++b)
                inputs[b] = to_tensor(corrupt(pairs[order[start + b]].input, config.corruption_sigma, rng));
            std::vector<SampleResult> samples(count);
            parallel_for(count, threads, [&](std::size_t b) {
                const TrainingPair& pair = pairs[order[start + b]];
                ForwardTrace<float> trace = network_forward(layers, inputs[b]);
                LossValue<float> loss = mse_loss(trace.output, to_tensor(pair.target));
                samples[b].loss = loss.value;
                samples[b].grads = network_backward(layers, trace, std::move(loss.gradient));
            });
            double batch_loss = 0.0;
            for (const SampleResult& s : samples) batch_loss += s.loss;
            if (!std::isfinite(batch_loss))
                fail(ErrorKind::numeric, "pretrain diverged: non-finite loss at epoch " +
                                             std::to_string(model.epochs_seen + 1) + ", batch " +
                                             std::to_string(start / config.batch_size));
            epoch_sum += batch_loss;
            for (std::size_t l = 0; l < model.layers.size(); ++l) {
                std::vector<double> gw(model.layers[l].weights.size(), 0.0);
                std::vector<double> gb(model.layers[l].bias.size(), 0.0);
                for (const SampleResult& s : samples) {
                    const auto& g = s.grads[l];
                    for (std::size_t i = 0; i < gw.size(); ++i) gw[i] += g.weights[i];
                    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g.bias[i];
                }
                Tensor mean_w(model.layers[l].weights.shape());
                for (std::size_t i = 0; i < gw.size(); ++i)
                    mean_w[i] = static_cast<float>(gw[i] / static_cast<double>(count));
                std::vector<float> mean_b(gb.size());
                for (std::size_t i = 0; i < gb.size(); ++i)
                    mean_b[i] = static_cast<float>(gb[i] / static_cast<double>(count));
                sgd_momentum_step(model.layers[l], mean_w, std::span<const float>(mean_b),
                                  config.learning_rate, config.momentum);
            }
        }
        ++model.epochs_seen;
        result.epoch_loss.push_back(epoch_sum / static_cast<double>(pairs.size()));
    }
    result.model = std::move(model);
    return result;
}

PretrainResult pretrain(const std::vector<TrainingPair>& pairs, const SdcaeConfig& config,
                        std::uint64_t corpus_hash, int threads) {
    ModelParams model = init_model(config);
    model.corpus_hash = corpus_hash;
    if (config.epochs == 0) return {std::move(model), {}};
    return continue_training(std::move(model), pairs, threads);
}

namespace {

std::vector<int> tile_origins(int extent, int tile, int stride) {
    std::vector<int> out;
    if (extent <= tile) return {0};
    for (int p = 0; p + tile < extent; p += stride) out.push_back(p);
    out.push_back(extent - tile);
    return out;
}

}  // namespace

Image apply_network(const ModelParams& model, const Image& upsampled) {
    return apply_network_with(model, upsampled, [&model](const Image&) -> const ModelParams& { return model; });
}

Image apply_network_with(const ModelParams& model, const Image& upsampled, const TileChooser& choose) {
    const int trim = model.border_trim();
    if (upsampled.rows() <= trim || upsampled.cols() <= trim)
        fail(ErrorKind::invalid_argument, "input " + upsampled.dims().str() +
                                              " smaller than the network footprint " +
                                              std::to_string(trim + 1));
    const int tile_r = std::min(model.config.sub_image, upsampled.rows());
    const int tile_c = std::min(model.config.sub_image, upsampled.cols());
    const int stride_r = std::max(1, (tile_r - trim) / 2);
    const int stride_c = std::max(1, (tile_c - trim) / 2);
    Image sum(upsampled.rows() - trim, upsampled.cols() - trim);
    Image weight(sum.dims());
    for (int r : tile_origins(upsampled.rows(), tile_r, stride_r)) {
        for (int c : tile_origins(upsampled.cols(), tile_c, stride_c)) {
            NormalizedPatch in = normalize_patch(upsampled.crop(r, c, tile_r, tile_c), model.config.norm_floor);
            const ModelParams& chosen = choose(in.data);
            if (chosen.border_trim() != trim)
                fail(ErrorKind::shape_mismatch, "tile model has a different border trim");
            const Image out =
                from_tensor(network_predict(std::span<const ConvLayer>(chosen.layers), to_tensor(in.data)));
            for (int i = 0; i < out.rows(); ++i)
                for (int j = 0; j < out.cols(); ++j) {
                    sum(r + i, c + j) += out(i, j) * in.magnitude + in.mean;
                    weight(r + i, c + j) += 1.0;
                }
        }
    }
    for (std::size_t i = 0; i < sum.size(); ++i) sum.pixels()[i] /= weight.pixels()[i];
    return sum;
}

Image forward_sr(const ModelParams& model, const Image& lr) {
    const Dims up = ceil_dims(lr.dims(), model.config.scale);
    const int trim = model.border_trim();
    if (up.rows <= trim || up.cols <= trim)
        fail(ErrorKind::invalid_argument, "forward_sr: input " + lr.dims().str() +
                                              " too small for the network footprint");
    return apply_network(model, resize_bicubic(lr, up));
}

}  // namespace djsr
