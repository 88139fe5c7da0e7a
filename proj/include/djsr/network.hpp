#pragma once

#include <span>
#include <vector>

#include "djsr/tensor.hpp"

namespace djsr {

// Activations kept from a forward pass: the input to every layer and every
// layer's pre-activation response.
template <typename T>
struct ForwardTrace {
    std::vector<BasicTensor<T>> inputs;
    std::vector<BasicTensor<T>> responses;
    BasicTensor<T> output;
};

template <typename T>
BasicTensor<T> network_predict(std::span<const BasicConvLayer<T>> layers, BasicTensor<T> x) {
    for (const auto& layer : layers) {
        x = conv2d_forward(x, layer);
        if (layer.rectify) x = relu_forward(x);
    }
    return x;
}

template <typename T>
ForwardTrace<T> network_forward(std::span<const BasicConvLayer<T>> layers, BasicTensor<T> x) {
    ForwardTrace<T> trace;
    trace.inputs.reserve(layers.size());
    trace.responses.reserve(layers.size());
    for (const auto& layer : layers) {
        trace.inputs.push_back(x);
        BasicTensor<T> z = conv2d_forward(x, layer);
        x = layer.rectify ? relu_forward(z) : z;
        trace.responses.push_back(std::move(z));
    }
    trace.output = std::move(x);
    return trace;
}

// Gradients of every layer's parameters given dLoss/dOutput.
template <typename T>
std::vector<ConvGradients<T>> network_backward(std::span<const BasicConvLayer<T>> layers,
                                               const ForwardTrace<T>& trace,
                                               BasicTensor<T> grad) {
    std::vector<ConvGradients<T>> grads(layers.size());
    for (std::size_t l = layers.size(); l-- > 0;) {
        if (layers[l].rectify) grad = relu_backward(trace.responses[l], grad);
        grads[l] = conv2d_backward(trace.inputs[l], layers[l], grad);
        grad = grads[l].input;
    }
    return grads;
}

}  // namespace djsr
