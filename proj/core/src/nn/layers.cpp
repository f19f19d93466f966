#include "dshgan/nn/layers.hpp"

#include <cmath>

#include <Eigen/Core>

#include "dshgan/errors.hpp"

namespace dshgan::nn {
namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

Tensor normal_tensor(Shape shape, double std_dev, std::mt19937_64& rng) {
  Tensor t(std::move(shape));
  std::normal_distribution<double> dist(0.0, std_dev);
  for (double& v : t.values()) v = dist(rng);
  return t;
}

void check_rank(const Tensor& t, std::size_t rank, const char* what) {
  require(t.rank() == rank, ErrorKind::kShape,
          std::string(what) + ": expected rank " + std::to_string(rank) + " input, got " +
              shape_string(t.shape()));
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;

ConstMatrixMap as_matrix(const Tensor& t, std::size_t rows, std::size_t cols) {
  return {t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}
MatrixMap as_matrix(Tensor& t, std::size_t rows, std::size_t cols) {
  return {t.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

// Geometry shared by convolution and its transpose: every "small" grid
// position (sy, sx) touches big-grid pixels (sy*s - p + ky, sx*s - p + kx).
struct PatchGeometry {
  std::size_t n, channels, big_h, big_w, small_h, small_w, k, stride, padding;

  std::size_t rows() const { return n * small_h * small_w; }
  std::size_t cols() const { return channels * k * k; }

  // Calls f(row, col, big_offset) for every in-range tap.
  template <class F>
  void for_each_tap(F f) const {
    const auto s = static_cast<std::ptrdiff_t>(stride);
    const auto p = static_cast<std::ptrdiff_t>(padding);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t sy = 0; sy < small_h; ++sy)
        for (std::size_t sx = 0; sx < small_w; ++sx) {
          const std::size_t row = (b * small_h + sy) * small_w + sx;
          for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t plane = (b * channels + c) * big_h * big_w;
            for (std::size_t ky = 0; ky < k; ++ky) {
              const std::ptrdiff_t y = static_cast<std::ptrdiff_t>(sy) * s - p + static_cast<std::ptrdiff_t>(ky);
              if (y < 0 || y >= static_cast<std::ptrdiff_t>(big_h)) continue;
              for (std::size_t kx = 0; kx < k; ++kx) {
                const std::ptrdiff_t x = static_cast<std::ptrdiff_t>(sx) * s - p + static_cast<std::ptrdiff_t>(kx);
                if (x < 0 || x >= static_cast<std::ptrdiff_t>(big_w)) continue;
                f(row, (c * k + ky) * k + kx,
                  plane + static_cast<std::size_t>(y) * big_w + static_cast<std::size_t>(x));
              }
            }
          }
        }
  }
};

// [rows, C*k*k] patch matrix read from a big-grid NCHW tensor.
Tensor gather_patches(const Tensor& big, const PatchGeometry& g) {
  Tensor out({g.rows(), g.cols()});
  double* o = out.data();
  const double* src = big.data();
  const std::size_t cols = g.cols();
  g.for_each_tap([&](std::size_t r, std::size_t c, std::size_t at) { o[r * cols + c] = src[at]; });
  return out;
}

// Adds a patch matrix back onto a big-grid NCHW tensor.
void scatter_patches(const Tensor& patches, const PatchGeometry& g, Tensor& big) {
  double* dst = big.data();
  const double* p = patches.data();
  const std::size_t cols = g.cols();
  g.for_each_tap([&](std::size_t r, std::size_t c, std::size_t at) { dst[at] += p[r * cols + c]; });
}

// NCHW <-> [N*H*W, C]
Tensor to_rows(const Tensor& t) {
  const std::size_t n = t.dim(0), c = t.dim(1), hw = t.dim(2) * t.dim(3);
  Tensor out({n * hw, c});
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* src = t.data() + (b * c + ch) * hw;
      for (std::size_t j = 0; j < hw; ++j) out[(b * hw + j) * c + ch] = src[j];
    }
  return out;
}

Tensor from_rows(const Tensor& rows, std::size_t n, std::size_t c, std::size_t h, std::size_t w) {
  Tensor out({n, c, h, w});
  const std::size_t hw = h * w;
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* dst = out.data() + (b * c + ch) * hw;
      for (std::size_t j = 0; j < hw; ++j) dst[j] = rows[(b * hw + j) * c + ch];
    }
  return out;
}

void add_channel_bias(Tensor& y, const Tensor& bias) {
  if (bias.empty()) return;
  const std::size_t n = y.dim(0), c = y.dim(1), hw = y.dim(2) * y.dim(3);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      double* p = y.data() + (b * c + ch) * hw;
      for (std::size_t j = 0; j < hw; ++j) p[j] += bias[ch];
    }
}

void accumulate_channel_sums(const Tensor& g, Tensor& gb) {
  const std::size_t n = g.dim(0), c = g.dim(1), hw = g.dim(2) * g.dim(3);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* p = g.data() + (b * c + ch) * hw;
      double acc = 0.0;
      for (std::size_t j = 0; j < hw; ++j) acc += p[j];
      gb[ch] += acc;
    }
}

Tensor dense_forward(const Dense& l, const Tensor& x) {
  check_rank(x, 2, "dense");
  const std::size_t n = x.dim(0), in = x.dim(1), out = l.weight.dim(0);
  require(in == l.weight.dim(1), ErrorKind::kShape,
          "dense: input width " + std::to_string(in) + " != " + std::to_string(l.weight.dim(1)));
  Tensor y({n, out});
  as_matrix(y, n, out).noalias() = as_matrix(x, n, in) * as_matrix(l.weight, out, in).transpose();
  if (!l.bias.empty()) as_matrix(y, n, out).rowwise() += as_matrix(l.bias, 1, out).row(0);
  return y;
}

Tensor dense_backward(const Dense& l, const Tensor& x, const Tensor& g, std::span<Tensor> grads,
                      bool need_input_grad) {
  const std::size_t n = x.dim(0), in = x.dim(1), out = l.weight.dim(0);
  if (!grads.empty()) {
    as_matrix(grads[0], out, in).noalias() += as_matrix(g, n, out).transpose() * as_matrix(x, n, in);
    if (!l.bias.empty()) as_matrix(grads[1], 1, out) += as_matrix(g, n, out).colwise().sum();
  }
  if (!need_input_grad) return {};
  Tensor gx({n, in});
  as_matrix(gx, n, in).noalias() = as_matrix(g, n, out) * as_matrix(l.weight, out, in);
  return gx;
}

Tensor conv_forward(const Conv2d& l, const Tensor& x) {
  check_rank(x, 4, "conv2d");
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = l.weight.dim(0), k = l.weight.dim(2);
  require(cin == l.weight.dim(1), ErrorKind::kShape, "conv2d: input channel mismatch");
  const std::size_t oh = conv_output_size(h, k, l.stride, l.padding);
  const std::size_t ow = conv_output_size(w, k, l.stride, l.padding);
  const PatchGeometry geo{n, cin, h, w, oh, ow, k, l.stride, l.padding};
  const Tensor patches = gather_patches(x, geo);
  Tensor rows({geo.rows(), cout});
  as_matrix(rows, geo.rows(), cout).noalias() =
      as_matrix(patches, geo.rows(), geo.cols()) * as_matrix(l.weight, cout, geo.cols()).transpose();
  Tensor y = from_rows(rows, n, cout, oh, ow);
  add_channel_bias(y, l.bias);
  return y;
}

Tensor conv_backward(const Conv2d& l, const Tensor& x, const Tensor& g, std::span<Tensor> grads,
                     bool need_input_grad) {
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = l.weight.dim(0), k = l.weight.dim(2);
  const PatchGeometry geo{n, cin, h, w, g.dim(2), g.dim(3), k, l.stride, l.padding};
  const Tensor grows = to_rows(g);
  if (!grads.empty()) {
    const Tensor patches = gather_patches(x, geo);
    as_matrix(grads[0], cout, geo.cols()).noalias() +=
        as_matrix(grows, geo.rows(), cout).transpose() * as_matrix(patches, geo.rows(), geo.cols());
    if (!l.bias.empty()) accumulate_channel_sums(g, grads[1]);
  }
  if (!need_input_grad) return {};
  Tensor dpatches({geo.rows(), geo.cols()});
  as_matrix(dpatches, geo.rows(), geo.cols()).noalias() =
      as_matrix(grows, geo.rows(), cout) * as_matrix(l.weight, cout, geo.cols());
  Tensor gx(x.shape());
  scatter_patches(dpatches, geo, gx);
  return gx;
}

Tensor conv_transpose_forward(const ConvTranspose2d& l, const Tensor& x) {
  check_rank(x, 4, "conv_transpose2d");
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = l.weight.dim(1), k = l.weight.dim(2);
  require(cin == l.weight.dim(0), ErrorKind::kShape, "conv_transpose2d: input channel mismatch");
  const std::size_t oh = conv_transpose_output_size(h, k, l.stride, l.padding);
  const std::size_t ow = conv_transpose_output_size(w, k, l.stride, l.padding);
  const PatchGeometry geo{n, cout, oh, ow, h, w, k, l.stride, l.padding};
  const Tensor xrows = to_rows(x);
  Tensor patches({geo.rows(), geo.cols()});
  as_matrix(patches, geo.rows(), geo.cols()).noalias() =
      as_matrix(xrows, geo.rows(), cin) * as_matrix(l.weight, cin, geo.cols());
  Tensor y({n, cout, oh, ow});
  scatter_patches(patches, geo, y);
  add_channel_bias(y, l.bias);
  return y;
}

Tensor conv_transpose_backward(const ConvTranspose2d& l, const Tensor& x, const Tensor& g,
                               std::span<Tensor> grads, bool need_input_grad) {
  const std::size_t n = x.dim(0), cin = x.dim(1), h = x.dim(2), w = x.dim(3);
  const std::size_t cout = l.weight.dim(1), k = l.weight.dim(2);
  const PatchGeometry geo{n, cout, g.dim(2), g.dim(3), h, w, k, l.stride, l.padding};
  const Tensor gpatches = gather_patches(g, geo);
  if (!grads.empty()) {
    const Tensor xrows = to_rows(x);
    as_matrix(grads[0], cin, geo.cols()).noalias() +=
        as_matrix(xrows, geo.rows(), cin).transpose() * as_matrix(gpatches, geo.rows(), geo.cols());
    if (!l.bias.empty()) accumulate_channel_sums(g, grads[1]);
  }
  if (!need_input_grad) return {};
  Tensor gxrows({geo.rows(), cin});
  as_matrix(gxrows, geo.rows(), cin).noalias() =
      as_matrix(gpatches, geo.rows(), geo.cols()) * as_matrix(l.weight, cin, geo.cols()).transpose();
  return from_rows(gxrows, n, cin, h, w);
}

template <class F>
Tensor map_values(const Tensor& x, F f) {
  Tensor y = x;
  for (double& v : y.values()) v = f(v);
  return y;
}

}  // namespace

std::size_t conv_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                             std::size_t padding) {
  require(in + 2 * padding >= kernel && stride > 0, ErrorKind::kShape,
          "convolution kernel larger than padded input");
  return (in + 2 * padding - kernel) / stride + 1;
}

std::size_t conv_transpose_output_size(std::size_t in, std::size_t kernel, std::size_t stride,
                                       std::size_t padding) {
  require((in - 1) * stride + kernel > 2 * padding, ErrorKind::kShape,
          "transposed convolution output would be empty");
  return (in - 1) * stride + kernel - 2 * padding;
}

Dense make_dense(std::size_t in, std::size_t out, bool bias, double init_std,
                 std::mt19937_64& rng) {
  Dense l;
  l.weight = normal_tensor({out, in}, init_std, rng);
  if (bias) l.bias = Tensor({out});
  return l;
}

Conv2d make_conv(std::size_t in_channels, std::size_t out_channels, std::size_t kernel,
                 std::size_t stride, std::size_t padding, bool bias, double init_std,
                 std::mt19937_64& rng) {
  Conv2d l;
  l.weight = normal_tensor({out_channels, in_channels, kernel, kernel}, init_std, rng);
  if (bias) l.bias = Tensor({out_channels});
  l.stride = stride;
  l.padding = padding;
  return l;
}

ConvTranspose2d make_conv_transpose(std::size_t in_channels, std::size_t out_channels,
                                    std::size_t kernel, std::size_t stride, std::size_t padding,
                                    bool bias, double init_std, std::mt19937_64& rng) {
  ConvTranspose2d l;
  l.weight = normal_tensor({in_channels, out_channels, kernel, kernel}, init_std, rng);
  if (bias) l.bias = Tensor({out_channels});
  l.stride = stride;
  l.padding = padding;
  return l;
}

Tensor forward(const Layer& layer, const Tensor& input) {
  return std::visit(
      Overloaded{
          [&](const Dense& l) { return dense_forward(l, input); },
          [&](const Conv2d& l) { return conv_forward(l, input); },
          [&](const ConvTranspose2d& l) { return conv_transpose_forward(l, input); },
          [&](const LeakyRelu& l) {
            return map_values(input, [s = l.slope](double v) { return v > 0.0 ? v : s * v; });
          },
          [&](const Tanh&) { return map_values(input, [](double v) { return std::tanh(v); }); },
          [&](const Sigmoid&) {
            return map_values(input, [](double v) { return 1.0 / (1.0 + std::exp(-v)); });
          },
          [&](const Flatten&) {
            require(input.rank() >= 1, ErrorKind::kShape, "flatten of a scalar");
            const std::size_t n = input.dim(0);
            return input.reshaped({n, n ? input.size() / n : 0});
          },
          [&](const Unflatten& l) {
            check_rank(input, 2, "unflatten");
            Shape shape{input.dim(0)};
            shape.insert(shape.end(), l.sample_shape.begin(), l.sample_shape.end());
            return input.reshaped(std::move(shape));
          },
      },
      layer);
}

Tensor backward(const Layer& layer, const Tensor& input, const Tensor& output,
                const Tensor& grad_output, std::span<Tensor> param_grads, bool need_input_grad) {
  return std::visit(
      Overloaded{
          [&](const Dense& l) {
            return dense_backward(l, input, grad_output, param_grads, need_input_grad);
          },
          [&](const Conv2d& l) {
            return conv_backward(l, input, grad_output, param_grads, need_input_grad);
          },
          [&](const ConvTranspose2d& l) {
            return conv_transpose_backward(l, input, grad_output, param_grads, need_input_grad);
          },
          [&](const LeakyRelu& l) {
            Tensor g = grad_output;
            for (std::size_t i = 0; i < g.size(); ++i)
              if (!(input[i] > 0.0)) g[i] *= l.slope;
            return g;
          },
          [&](const Tanh&) {
            Tensor g = grad_output;
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= 1.0 - output[i] * output[i];
            return g;
          },
          [&](const Sigmoid&) {
            Tensor g = grad_output;
            for (std::size_t i = 0; i < g.size(); ++i) g[i] *= output[i] * (1.0 - output[i]);
            return g;
          },
          [&](const Flatten&) { return grad_output.reshaped(input.shape()); },
          [&](const Unflatten&) { return grad_output.reshaped(input.shape()); },
      },
      layer);
}

namespace {

template <class Slot, class L>
std::vector<Slot> weighted_slots(L& l) {
  std::vector<Slot> out{{"weight", &l.weight}};
  if (!l.bias.empty()) out.push_back({"bias", &l.bias});
  return out;
}

}  // namespace

std::vector<ParamSlot> parameters(Layer& layer) {
  return std::visit(
      Overloaded{
          [](Dense& l) { return weighted_slots<ParamSlot>(l); },
          [](Conv2d& l) { return weighted_slots<ParamSlot>(l); },
          [](ConvTranspose2d& l) { return weighted_slots<ParamSlot>(l); },
          [](auto&) { return std::vector<ParamSlot>{}; },
      },
      layer);
}

std::vector<ConstParamSlot> parameters(const Layer& layer) {
  return std::visit(
      Overloaded{
          [](const Dense& l) { return weighted_slots<ConstParamSlot>(l); },
          [](const Conv2d& l) { return weighted_slots<ConstParamSlot>(l); },
          [](const ConvTranspose2d& l) { return weighted_slots<ConstParamSlot>(l); },
          [](const auto&) { return std::vector<ConstParamSlot>{}; },
      },
      layer);
}

}  // namespace dshgan::nn
