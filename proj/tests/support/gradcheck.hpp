#pragma once

// Central finite differences over parameter tensors, compared to analytic
// gradients with a norm-based relative error.

#include <cmath>
#include <random>
#include <span>
#include <vector>

#include "dshgan/tensor.hpp"

namespace dshgan::testing {

inline constexpr double kFdStep = 1e-5;
inline constexpr double kFdTolerance = 1e-4;

template <class Loss>
std::vector<Tensor> numeric_gradients(const std::vector<Tensor*>& params, Loss&& loss,
                                      double step = kFdStep) {
  std::vector<Tensor> out;
  for (Tensor* p : params) {
    Tensor g(p->shape());
    for (std::size_t i = 0; i < p->size(); ++i) {
      const double saved = (*p)[i];
      (*p)[i] = saved + step;
      const double up = loss();
      (*p)[i] = saved - step;
      const double down = loss();
      (*p)[i] = saved;
      g[i] = (up - down) / (2.0 * step);
    }
    out.push_back(std::move(g));
  }
  return out;
}

// As above, also reporting whether `pattern()` at any perturbed point
// differs from its value at the unperturbed parameters.
template <class Loss, class Pattern>
std::vector<Tensor> numeric_gradients(const std::vector<Tensor*>& params, Loss&& loss, Pattern&& pattern,
                                      bool* pattern_changed, double step = kFdStep) {
  const auto base = pattern();
  *pattern_changed = false;
  return numeric_gradients(params, [&] {
    const double v = loss();
    if (!*pattern_changed && pattern() != base) *pattern_changed = true;
    return v;
  }, step);
}

// ||a - b|| / (||a|| + ||b||) over all tensors jointly; 0 when both vanish.
inline double relative_error(std::span<const Tensor> a, std::span<const Tensor> b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t t = 0; t < a.size(); ++t)
    for (std::size_t i = 0; i < a[t].size(); ++i) {
      diff += (a[t][i] - b[t][i]) * (a[t][i] - b[t][i]);
      na += a[t][i] * a[t][i];
      nb += b[t][i] * b[t][i];
    }
  const double denom = std::sqrt(na) + std::sqrt(nb);
  return denom == 0.0 ? 0.0 : std::sqrt(diff) / denom;
}

inline double relative_error(const Tensor& a, const Tensor& b) {
  return relative_error(std::span(&a, 1), std::span(&b, 1));
}

inline Tensor random_tensor(Shape shape, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> normal(0.0, scale);
  for (double& v : t.values()) v = normal(rng);
  return t;
}

inline double dot(const Tensor& a, const Tensor& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace dshgan::testing
