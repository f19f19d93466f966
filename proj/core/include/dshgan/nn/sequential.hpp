#pragma once

#include <span>
#include <string>
#include <vector>

#include "dshgan/nn/layers.hpp"

namespace dshgan::nn {

struct NamedTensor {
  std::string name;
  Tensor* value;
};
struct ConstNamedTensor {
  std::string name;
  const Tensor* value;
};

// Ordered stack of layers with an explicit activation trace for backprop.
class Sequential {
 public:
  // activations[0] is the input; activations[i + 1] is the output of layer i.
  struct Trace {
    std::vector<Tensor> activations;
  };

  Sequential() = default;
  explicit Sequential(std::vector<Layer> layers) : layers_(std::move(layers)) {}

  void add(Layer layer) { layers_.push_back(std::move(layer)); }
  std::size_t layer_count() const noexcept { return layers_.size(); }
  const Layer& layer(std::size_t i) const { return layers_.at(i); }
  Layer& layer(std::size_t i) { return layers_.at(i); }

  Tensor forward(const Tensor& input) const;
  Tensor forward(const Tensor& input, Trace& trace) const;

  // `grads` holds one tensor per parameter in `parameters()` order and is
  // accumulated into; pass an empty span when only the input gradient is
  // wanted.
  Tensor backward(const Trace& trace, const Tensor& grad_output, std::span<Tensor> grads,
                  bool need_input_grad = true) const;

  std::vector<NamedTensor> parameters(const std::string& prefix);
  std::vector<ConstNamedTensor> parameters(const std::string& prefix) const;
  std::vector<Tensor> zero_grads() const;
  std::size_t parameter_tensor_count() const;

  bool operator==(const Sequential& other) const;

 private:
  std::vector<Layer> layers_;
};

}  // namespace dshgan::nn
