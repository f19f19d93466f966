#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace dshgan {

using Shape = std::vector<std::size_t>;

std::size_t element_count(const Shape& shape);
std::string shape_string(const Shape& shape);

// Dense row-major array of doubles. Batched image tensors are NCHW.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t dim(std::size_t axis) const { return shape_.at(axis); }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double* data() noexcept { return values_.data(); }
  const double* data() const noexcept { return values_.data(); }
  std::span<double> values() noexcept { return values_; }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double>& storage() noexcept { return values_; }
  const std::vector<double>& storage() const noexcept { return values_; }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  // Same values, new shape with identical element count.
  Tensor reshaped(Shape shape) const;
  void fill(double value);

  // Rows [begin, begin + count) along the leading axis.
  Tensor slice_rows(std::size_t begin, std::size_t count) const;

  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> values_;
};

// Stacks equally shaped tensors along a new leading axis.
Tensor stack(std::span<const Tensor> parts);
// Concatenates along the existing leading axis.
Tensor concat_rows(std::span<const Tensor> parts);

void require_shape(const Tensor& t, const Shape& expected, const char* what);

}  // namespace dshgan
