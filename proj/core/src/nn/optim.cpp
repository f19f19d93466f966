#include "dshgan/nn/optim.hpp"

#include <cmath>

#include "dshgan/errors.hpp"

namespace dshgan::nn {
namespace {

void check_aligned(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  require(params.size() == grads.size(), ErrorKind::kShape,
          "parameter and gradient counts differ");
  for (std::size_t i = 0; i < params.size(); ++i)
    require(params[i]->shape() == grads[i].shape(), ErrorKind::kShape,
            "gradient shape " + shape_string(grads[i].shape()) + " does not match parameter " +
                shape_string(params[i]->shape()));
}

void ensure_state(std::vector<Tensor>& state, std::span<Tensor* const> params) {
  if (state.size() == params.size()) return;
  state.clear();
  for (const Tensor* p : params) state.emplace_back(p->shape());
}

}  // namespace

void gradient_step(std::span<Tensor* const> params, std::span<Tensor> velocity,
                   std::span<const Tensor> grads, const MomentumSgdConfig& cfg) {
  check_aligned(params, grads);
  require(velocity.size() == params.size(), ErrorKind::kShape, "velocity count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    Tensor& v = velocity[i];
    const Tensor& g = grads[i];
    require(v.shape() == p.shape(), ErrorKind::kShape, "velocity shape mismatch");
    for (std::size_t j = 0; j < p.size(); ++j) {
      v[j] = cfg.momentum * v[j] + g[j] + cfg.weight_decay * p[j];
      p[j] -= cfg.learning_rate * v[j];
    }
  }
}

void MomentumSgd::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  ensure_state(velocity_, params);
  gradient_step(params, velocity_, grads, cfg_);
}

void Adam::step(std::span<Tensor* const> params, std::span<const Tensor> grads) {
  check_aligned(params, grads);
  ensure_state(m_, params);
  ensure_state(v_, params);
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g[j];
      v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m_[i][j] / bc1;
      const double vhat = v_[i][j] / bc2;
      p[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
    }
  }
}

}  // namespace dshgan::nn
