#pragma once

// Multinomial logistic regression on raw pixels. Used as an independent judge
// of what class a generated image depicts.

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dshgan/datasets.hpp"

namespace dshgan::testing {

class PixelClassifier {
 public:
  // Full-batch gradient descent on mean cross-entropy with a small L2 term.
  PixelClassifier(const Dataset& train, std::size_t epochs = 300, double lr = 0.5, double l2 = 1e-4)
      : classes_(train.class_count), dim_(train.image_shape.pixel_count()),
        w_(classes_ * (dim_ + 1), 0.0) {
    std::vector<double> grad(w_.size());
    std::vector<double> p(classes_);
    const double inv = 1.0 / static_cast<double>(train.size());
    for (std::size_t e = 0; e < epochs; ++e) {
      std::fill(grad.begin(), grad.end(), 0.0);
      for (const ImageExample& ex : train.examples) {
        const LabelVector& y = ex.is_labeled ? ex.label : ex.true_label;
        probabilities(ex.pixels, p);
        const std::size_t target = y.single_index();
        for (std::size_t c = 0; c < classes_; ++c) {
          const double d = (p[c] - (c == target ? 1.0 : 0.0)) * inv;
          double* g = grad.data() + c * (dim_ + 1);
          for (std::size_t j = 0; j < dim_; ++j) g[j] += d * ex.pixels[j];
          g[dim_] += d;
        }
      }
      for (std::size_t i = 0; i < w_.size(); ++i) w_[i] -= lr * (grad[i] + l2 * w_[i]);
    }
  }

  std::size_t predict(std::span<const double> pixels) const {
    std::vector<double> p(classes_);
    probabilities(pixels, p);
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes_; ++c)
      if (p[c] > p[best]) best = c;
    return best;
  }

  double accuracy(const Dataset& ds) const {
    std::size_t ok = 0;
    for (const ImageExample& ex : ds.examples) {
      const LabelVector& y = ex.is_labeled ? ex.label : ex.true_label;
      ok += y[predict(ex.pixels)] ? 1 : 0;
    }
    return static_cast<double>(ok) / static_cast<double>(ds.size());
  }

 private:
  void probabilities(std::span<const double> x, std::vector<double>& p) const {
    double top = -1e300;
    for (std::size_t c = 0; c < classes_; ++c) {
      const double* w = w_.data() + c * (dim_ + 1);
      double a = w[dim_];
      for (std::size_t j = 0; j < dim_; ++j) a += w[j] * x[j];
      p[c] = a;
      top = std::max(top, a);
    }
    double z = 0.0;
    for (double& v : p) z += (v = std::exp(v - top));
    for (double& v : p) v /= z;
  }

  std::size_t classes_;
  std::size_t dim_;
  std::vector<double> w_;
};

}  // namespace dshgan::testing
