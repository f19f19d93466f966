#include "dshgan/nn/sequential.hpp"

#include "dshgan/errors.hpp"

namespace dshgan::nn {

Tensor Sequential::forward(const Tensor& input) const {
  Tensor x = input;
  for (const Layer& l : layers_) x = nn::forward(l, x);
  return x;
}

Tensor Sequential::forward(const Tensor& input, Trace& trace) const {
  trace.activations.clear();
  trace.activations.reserve(layers_.size() + 1);
  trace.activations.push_back(input);
  for (const Layer& l : layers_) trace.activations.push_back(nn::forward(l, trace.activations.back()));
  return trace.activations.back();
}

Tensor Sequential::backward(const Trace& trace, const Tensor& grad_output, std::span<Tensor> grads,
                            bool need_input_grad) const {
  require(trace.activations.size() == layers_.size() + 1, ErrorKind::kShape,
          "backward called with a trace from a different network");
  require(grads.empty() || grads.size() == parameter_tensor_count(), ErrorKind::kShape,
          "gradient buffer count does not match parameter count");
  std::size_t offset = grads.size();
  Tensor g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const std::size_t count = nn::parameters(layers_[i]).size();
    std::span<Tensor> layer_grads;
    if (!grads.empty()) {
      offset -= count;
      layer_grads = grads.subspan(offset, count);
    }
    const bool want_input = need_input_grad || i > 0;
    g = nn::backward(layers_[i], trace.activations[i], trace.activations[i + 1], g, layer_grads,
                     want_input);
  }
  return g;
}

std::vector<NamedTensor> Sequential::parameters(const std::string& prefix) {
  std::vector<NamedTensor> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    for (const ParamSlot& s : nn::parameters(layers_[i]))
      out.push_back({prefix + std::to_string(i) + "." + std::string(s.name), s.value});
  return out;
}

std::vector<ConstNamedTensor> Sequential::parameters(const std::string& prefix) const {
  std::vector<ConstNamedTensor> out;
  for (std::size_t i = 0; i < layers_.size(); ++i)
    for (const ConstParamSlot& s : nn::parameters(layers_[i]))
      out.push_back({prefix + std::to_string(i) + "." + std::string(s.name), s.value});
  return out;
}

std::vector<Tensor> Sequential::zero_grads() const {
  std::vector<Tensor> out;
  for (const Layer& l : layers_)
    for (const ConstParamSlot& s : nn::parameters(l)) out.emplace_back(s.value->shape());
  return out;
}

std::size_t Sequential::parameter_tensor_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers_) n += nn::parameters(l).size();
  return n;
}

bool Sequential::operator==(const Sequential& other) const {
  if (layers_.size() != other.layers_.size()) return false;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    if (layers_[i].index() != other.layers_[i].index()) return false;
    const auto a = nn::parameters(layers_[i]);
    const auto b = nn::parameters(other.layers_[i]);
    if (a.size() != b.size()) return false;
    for (std::size_t j = 0; j < a.size(); ++j)
      if (!(*a[j].value == *b[j].value)) return false;
  }
  return true;
}

}  // namespace dshgan::nn
