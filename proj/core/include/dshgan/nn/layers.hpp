#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "dshgan/tensor.hpp"

namespace dshgan::nn {

// Fully connected: y = x Wᵀ + b. weight [out, in], bias [out] or empty.
struct Dense {
  Tensor weight;
  Tensor bias;
};

// weight [out_channels, in_channels, k, k], bias [out_channels] or empty.
struct Conv2d {
  Tensor weight;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

// weight [in_channels, out_channels, k, k], bias [out_channels] or empty.
struct ConvTranspose2d {
  Tensor weight;
  Tensor bias;
  std::size_t stride = 1;
  std::size_t padding = 0;
};

struct LeakyRelu {
  double slope = 0.2;
};
struct Tanh {};
struct Sigmoid {};
// [N, ...] -> [N, prod(...)]
struct Flatten {};
// [N, prod(sample_shape)] -> [N, sample_shape...]
struct Unflatten {
  Shape sample_shape;
};

using Layer =
    std::variant<Dense, Conv2d, ConvTranspose2d, LeakyRelu, Tanh, Sigmoid, Flatten, Unflatten>;

Dense make_dense(std::size_t in, std::size_t out, bool bias, double init_std, std::mt19937_64& rng);
Conv2d make_conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                 std::size_t stride, std::size_t padding, bool bias, double init_std,
                 std::mt19937_64& rng);
ConvTranspose2d make_conv_transpose(std::size_t in_channels, std::size_t out_channels,
                                    std::size_t kernel, std::size_t stride, std::size_t padding,
                                    bool bias, double init_std, std::mt19937_64& rng);

std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                             std::size_t padding);
std::size_t conv_transpose_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                                       std::size_t padding);

Tensor forward(const Layer& layer, const Tensor& input);

// Accumulates parameter gradients into `param_grads` (same order as
// `parameters`; may be empty to skip) and returns the gradient w.r.t. the
// input, or an empty tensor when `need_input_grad` is false.
Tensor backward(const Layer& layer, const Tensor& input, const Tensor& output,
                const Tensor& grad_output, std::span<Tensor> param_grads, bool need_input_grad);

struct ParamSlot {
  std::string_view name;
  Tensor* value;
};
struct ConstParamSlot {
  std::string_view name;
  const Tensor* value;
};

// Trainable tensors of a layer; empty bias tensors are omitted.
std::vector<ParamSlot> parameters(Layer& layer);
std::vector<ConstParamSlot> parameters(const Layer& layer);

}  // namespace dshgan::nn
