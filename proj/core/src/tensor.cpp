#include "dshgan/tensor.hpp"

#include <algorithm>
#include <functional>
#include <numeric>

#include "dshgan/errors.hpp"

namespace dshgan {

std::size_t element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
  std::string out = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(shape[i]);
  }
  return out + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), values_(element_count(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values)) {
  require(values_.size() == element_count(shape_), ErrorKind::kShape,
          "value count " + std::to_string(values_.size()) + " does not match shape " +
              shape_string(shape_));
}

Tensor Tensor::reshaped(Shape shape) const {
  require(element_count(shape) == values_.size(), ErrorKind::kShape,
          "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return Tensor(std::move(shape), values_);
}

void Tensor::fill(double value) { std::fill(values_.begin(), values_.end(), value); }

Tensor Tensor::slice_rows(std::size_t begin, std::size_t count) const {
  require(rank() >= 1 && begin + count <= shape_[0], ErrorKind::kShape, "row slice out of range");
  const std::size_t row = shape_[0] ? values_.size() / shape_[0] : 0;
  Shape shape = shape_;
  shape[0] = count;
  std::vector<double> out(values_.begin() + static_cast<std::ptrdiff_t>(begin * row),
                          values_.begin() + static_cast<std::ptrdiff_t>((begin + count) * row));
  return Tensor(std::move(shape), std::move(out));
}

Tensor stack(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorKind::kEmptyInput, "stack of zero tensors");
  Shape shape{parts.size()};
  shape.insert(shape.end(), parts[0].shape().begin(), parts[0].shape().end());
  std::vector<double> values;
  values.reserve(element_count(shape));
  for (const Tensor& p : parts) {
    require(p.shape() == parts[0].shape(), ErrorKind::kShape, "stack of mismatched shapes");
    values.insert(values.end(), p.storage().begin(), p.storage().end());
  }
  return Tensor(std::move(shape), std::move(values));
}

Tensor concat_rows(std::span<const Tensor> parts) {
  require(!parts.empty(), ErrorKind::kEmptyInput, "concat of zero tensors");
  Shape shape = parts[0].shape();
  shape[0] = 0;
  std::vector<double> values;
  for (const Tensor& p : parts) {
    require(p.rank() == shape.size() &&
                std::equal(p.shape().begin() + 1, p.shape().end(), shape.begin() + 1),
            ErrorKind::kShape, "concat of mismatched shapes");
    shape[0] += p.dim(0);
    values.insert(values.end(), p.storage().begin(), p.storage().end());
  }
  return Tensor(std::move(shape), std::move(values));
}

void require_shape(const Tensor& t, const Shape& expected, const char* what) {
  require(t.shape() == expected, ErrorKind::kShape,
          std::string(what) + ": expected " + shape_string(expected) + ", got " +
              shape_string(t.shape()));
}

}  // namespace dshgan
