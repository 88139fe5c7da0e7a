#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "djsr/error.hpp"

namespace djsr {

struct Shape4 {
    std::size_t batch = 0;
    std::size_t channels = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;

    std::size_t count() const { return batch * channels * rows * cols; }
    std::size_t plane() const { return rows * cols; }
    bool operator==(const Shape4&) const = default;
    std::string str() const;
};

// Dense (batch, channel, row, col) array, row-major.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;
    explicit BasicTensor(Shape4 shape, T fill = T(0))
        : shape_(shape), data_(shape.count(), fill) {}
    BasicTensor(Shape4 shape, std::vector<T> data) : shape_(shape), data_(std::move(data)) {
        if (data_.size() != shape_.count())
            fail(ErrorKind::shape_mismatch,
                 "tensor data length " + std::to_string(data_.size()) +
                     " does not match shape " + shape_.str());
    }

    const Shape4& shape() const { return shape_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    std::span<T> data() { return data_; }
    std::span<const T> data() const { return data_; }
    std::vector<T>& storage() { return data_; }
    const std::vector<T>& storage() const { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    std::size_t index(std::size_t n, std::size_t c, std::size_t r, std::size_t k) const {
        return ((n * shape_.channels + c) * shape_.rows + r) * shape_.cols + k;
    }
    T& operator()(std::size_t n, std::size_t c, std::size_t r, std::size_t k) {
        return data_[index(n, c, r, k)];
    }
    const T& operator()(std::size_t n, std::size_t c, std::size_t r, std::size_t k) const {
        return data_[index(n, c, r, k)];
    }

    // Pointer to the start of plane (n, c).
    T* plane(std::size_t n, std::size_t c) { return data_.data() + index(n, c, 0, 0); }
    const T* plane(std::size_t n, std::size_t c) const { return data_.data() + index(n, c, 0, 0); }

    bool all_finite() const {
        for (const T& v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

    template <typename U>
    BasicTensor<U> cast() const {
        BasicTensor<U> out(shape_);
        for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
        return out;
    }

    bool operator==(const BasicTensor&) const = default;

private:
    Shape4 shape_{};
    std::vector<T> data_;
};

using Tensor = BasicTensor<float>;
using TensorD = BasicTensor<double>;

// A valid (unpadded) cross-correlation layer. Weights are (out, in, kh, kw).
// When zero_bias is set the bias vector stays identically zero.
template <typename T>
struct BasicConvLayer {
    BasicTensor<T> weights;
    std::vector<T> bias;
    BasicTensor<T> momentum;       // delta, mirrors weights
    std::vector<T> bias_momentum;  // mirrors bias
    bool zero_bias = true;
    bool rectify = true;  // ReLU after the convolution

    BasicConvLayer() = default;
    BasicConvLayer(std::size_t out_ch, std::size_t in_ch, std::size_t kh, std::size_t kw,
                   bool zero_bias_ = true, bool rectify_ = true)
        : weights(Shape4{out_ch, in_ch, kh, kw}),
          bias(out_ch, T(0)),
          momentum(Shape4{out_ch, in_ch, kh, kw}),
          bias_momentum(out_ch, T(0)),
          zero_bias(zero_bias_),
          rectify(rectify_) {
        if (kh == 0 || kw == 0 || kh % 2 == 0 || kw % 2 == 0)
            fail(ErrorKind::invalid_argument,
                 "kernel dims must be odd and positive, got " + std::to_string(kh) + "x" +
                     std::to_string(kw));
    }

    std::size_t out_channels() const { return weights.shape().batch; }
    std::size_t in_channels() const { return weights.shape().channels; }
    std::size_t kernel_rows() const { return weights.shape().rows; }
    std::size_t kernel_cols() const { return weights.shape().cols; }

    template <typename U>
    BasicConvLayer<U> cast() const {
        BasicConvLayer<U> out;
        out.weights = weights.template cast<U>();
        out.momentum = momentum.template cast<U>();
        out.bias.assign(bias.begin(), bias.end());
        out.bias_momentum.assign(bias_momentum.begin(), bias_momentum.end());
        out.zero_bias = zero_bias;
        out.rectify = rectify;
        return out;
    }

    bool operator==(const BasicConvLayer&) const = default;
};

using ConvLayer = BasicConvLayer<float>;
using ConvLayerD = BasicConvLayer<double>;

template <typename T>
struct ConvGradients {
    BasicTensor<T> input;
    BasicTensor<T> weights;
    std::vector<T> bias;
};

template <typename T>
struct LossValue {
    double value = 0.0;
    BasicTensor<T> gradient;
};

inline std::string Shape4::str() const {
    return "(" + std::to_string(batch) + "," + std::to_string(channels) + "," +
           std::to_string(rows) + "," + std::to_string(cols) + ")";
}

template <typename T>
BasicTensor<T> conv2d_forward(const BasicTensor<T>& input, const BasicConvLayer<T>& layer) {
    const Shape4& in = input.shape();
    const Shape4& ks = layer.weights.shape();
    if (in.channels != ks.channels || in.rows < ks.rows || in.cols < ks.cols)
        fail(ErrorKind::shape_mismatch,
             "conv2d_forward: input " + in.str() + " incompatible with kernel " + ks.str());
    const std::size_t oh = in.rows - ks.rows + 1;
    const std::size_t ow = in.cols - ks.cols + 1;
    BasicTensor<T> out(Shape4{in.batch, ks.batch, oh, ow});
    std::vector<double> acc(oh * ow);
    for (std::size_t n = 0; n < in.batch; ++n) {
        for (std::size_t o = 0; o < ks.batch; ++o) {
            std::fill(acc.begin(), acc.end(), static_cast<double>(layer.bias[o]));
            for (std::size_t i = 0; i < ks.channels; ++i) {
                const T* src = input.plane(n, i);
                const T* w = layer.weights.plane(o, i);
                for (std::size_t u = 0; u < ks.rows; ++u) {
                    for (std::size_t v = 0; v < ks.cols; ++v) {
                        const double wv = w[u * ks.cols + v];
                        if (wv == 0.0) continue;
                        for (std::size_t r = 0; r < oh; ++r) {
                            const T* row = src + (r + u) * in.cols + v;
                            double* dst = acc.data() + r * ow;
                            for (std::size_t c = 0; c < ow; ++c) dst[c] += wv * row[c];
                        }
                    }
                }
            }
            T* dst = out.plane(n, o);
            for (std::size_t j = 0; j < acc.size(); ++j) dst[j] = static_cast<T>(acc[j]);
        }
    }
    return out;
}

template <typename T>
ConvGradients<T> conv2d_backward(const BasicTensor<T>& input, const BasicConvLayer<T>& layer,
                                 const BasicTensor<T>& grad_out) {
    const Shape4& in = input.shape();
    const Shape4& ks = layer.weights.shape();
    if (in.channels != ks.channels || in.rows < ks.rows || in.cols < ks.cols)
        fail(ErrorKind::shape_mismatch,
             "conv2d_backward: input " + in.str() + " incompatible with kernel " + ks.str());
    const std::size_t oh = in.rows - ks.rows + 1;
    const std::size_t ow = in.cols - ks.cols + 1;
    const Shape4 expected{in.batch, ks.batch, oh, ow};
    if (grad_out.shape() != expected)
        fail(ErrorKind::shape_mismatch, "conv2d_backward: grad_out " + grad_out.shape().str() +
                                            " does not match forward output " + expected.str());

    std::vector<double> gin(in.count(), 0.0);
    std::vector<double> gw(ks.count(), 0.0);
    std::vector<double> gb(ks.batch, 0.0);
    for (std::size_t n = 0; n < in.batch; ++n) {
        for (std::size_t o = 0; o < ks.batch; ++o) {
            const T* g = grad_out.plane(n, o);
            double bsum = 0.0;
            for (std::size_t j = 0; j < oh * ow; ++j) bsum += g[j];
            gb[o] += bsum;
            for (std::size_t i = 0; i < ks.channels; ++i) {
                const T* src = input.plane(n, i);
                const T* w = layer.weights.plane(o, i);
                double* gin_plane = gin.data() + input.index(n, i, 0, 0);
                double* gw_plane = gw.data() + layer.weights.index(o, i, 0, 0);
                for (std::size_t u = 0; u < ks.rows; ++u) {
                    for (std::size_t v = 0; v < ks.cols; ++v) {
                        const double wv = w[u * ks.cols + v];
                        double wsum = 0.0;
                        for (std::size_t r = 0; r < oh; ++r) {
                            const T* row = src + (r + u) * in.cols + v;
                            const T* grow = g + r * ow;
                            double* gi = gin_plane + (r + u) * in.cols + v;
                            for (std::size_t c = 0; c < ow; ++c) {
                                wsum += static_cast<double>(grow[c]) * row[c];
                                gi[c] += wv * grow[c];
                            }
                        }
                        gw_plane[u * ks.cols + v] += wsum;
                    }
                }
            }
        }
    }
    ConvGradients<T> grads;
    grads.input = BasicTensor<T>(in);
    for (std::size_t j = 0; j < gin.size(); ++j) grads.input[j] = static_cast<T>(gin[j]);
    grads.weights = BasicTensor<T>(ks);
    for (std::size_t j = 0; j < gw.size(); ++j) grads.weights[j] = static_cast<T>(gw[j]);
    grads.bias.resize(ks.batch);
    for (std::size_t o = 0; o < ks.batch; ++o)
        grads.bias[o] = layer.zero_bias ? T(0) : static_cast<T>(gb[o]);
    return grads;
}

template <typename T>
BasicTensor<T> relu_forward(const BasicTensor<T>& input) {
    BasicTensor<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i) out[i] = input[i] > T(0) ? input[i] : T(0);
    return out;
}

// Gradient passes only where the forward input was strictly positive.
template <typename T>
BasicTensor<T> relu_backward(const BasicTensor<T>& input, const BasicTensor<T>& grad_out) {
    if (input.shape() != grad_out.shape())
        fail(ErrorKind::shape_mismatch, "relu_backward: input " + input.shape().str() +
                                            " vs grad " + grad_out.shape().str());
    BasicTensor<T> out(input.shape());
    for (std::size_t i = 0; i < input.size(); ++i)
        out[i] = input[i] > T(0) ? grad_out[i] : T(0);
    return out;
}

template <typename T>
LossValue<T> mse_loss(const BasicTensor<T>& pred, const BasicTensor<T>& target) {
    if (pred.shape() != target.shape())
        fail(ErrorKind::shape_mismatch, "mse_loss: prediction " + pred.shape().str() +
                                            " vs target " + target.shape().str());
    LossValue<T> loss;
    loss.gradient = BasicTensor<T>(pred.shape());
    const double count = static_cast<double>(pred.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
        sum += d * d;
        loss.gradient[i] = static_cast<T>(2.0 * d / count);
    }
    loss.value = count > 0 ? sum / count : 0.0;
    return loss;
}

// delta <- scale * (momentum * delta - lr * grad); W <- W + delta.
// scale = 1 is plain momentum SGD; the weighted fine-tuning update passes
// its per-pair confidence as scale.
template <typename T>
void momentum_update(BasicConvLayer<T>& layer, const BasicTensor<T>& grad_weights,
                     std::span<const T> grad_bias, double lr, double momentum, double scale) {
    if (grad_weights.shape() != layer.weights.shape())
        fail(ErrorKind::shape_mismatch, "momentum_update: gradient " + grad_weights.shape().str() +
                                            " vs weights " + layer.weights.shape().str());
    for (std::size_t i = 0; i < grad_weights.size(); ++i) {
        const double d = scale * (momentum * static_cast<double>(layer.momentum[i]) -
                                  lr * static_cast<double>(grad_weights[i]));
        layer.momentum[i] = static_cast<T>(d);
        layer.weights[i] = static_cast<T>(layer.weights[i] + layer.momentum[i]);
    }
    if (layer.zero_bias) return;
    for (std::size_t o = 0; o < layer.bias.size() && o < grad_bias.size(); ++o) {
        const double d = scale * (momentum * static_cast<double>(layer.bias_momentum[o]) -
                                  lr * static_cast<double>(grad_bias[o]));
        layer.bias_momentum[o] = static_cast<T>(d);
        layer.bias[o] = static_cast<T>(layer.bias[o] + layer.bias_momentum[o]);
    }
}

template <typename T>
bool all_finite(std::span<const T> values) {
    for (const T& v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

template <typename T>
void sgd_momentum_step(BasicConvLayer<T>& layer, const BasicTensor<T>& grad_weights,
                       std::span<const T> grad_bias, double lr, double momentum) {
    if (!(lr > 0.0)) fail(ErrorKind::invalid_argument, "sgd_momentum_step: lr must be > 0");
    if (!(momentum >= 0.0 && momentum < 1.0))
        fail(ErrorKind::invalid_argument, "sgd_momentum_step: momentum must be in [0, 1)");
    if (!grad_weights.all_finite() || !all_finite(grad_bias))
        fail(ErrorKind::numeric, "sgd_momentum_step: non-finite gradient");
    momentum_update(layer, grad_weights, grad_bias, lr, momentum, 1.0);
}

template <typename T>
void sgd_momentum_step(BasicConvLayer<T>& layer, const BasicTensor<T>& grad_weights, double lr,
                       double momentum) {
    sgd_momentum_step(layer, grad_weights, std::span<const T>{}, lr, momentum);
}

}  // namespace djsr
