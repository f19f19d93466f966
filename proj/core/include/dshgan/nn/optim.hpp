#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dshgan/tensor.hpp"

namespace dshgan::nn {

struct MomentumSgdConfig {
  double learning_rate = 1e-4;
  double momentum = 0.9;
  double weight_decay = 5e-4;
};

// One momentum step with L2 weight decay folded into the gradient:
//   v <- m * v + g + wd * p
//   p <- p - lr * v
void gradient_step(std::span<Tensor* const> params, std::span<Tensor> velocity,
                   std::span<const Tensor> grads, const MomentumSgdConfig& cfg);

class MomentumSgd {
 public:
  explicit MomentumSgd(MomentumSgdConfig cfg) : cfg_(cfg) {}

  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);
  void set_learning_rate(double lr) noexcept { cfg_.learning_rate = lr; }
  const MomentumSgdConfig& config() const noexcept { return cfg_; }

 private:
  MomentumSgdConfig cfg_;
  std::vector<Tensor> velocity_;
};

struct AdamConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}

  void step(std::span<Tensor* const> params, std::span<const Tensor> grads);
  std::uint64_t steps_taken() const noexcept { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  std::uint64_t t_ = 0;
};

}  // namespace dshgan::nn
