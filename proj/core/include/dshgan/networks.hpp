#pragma once

#include <array>
#include <cstddef>
#include <random>

#include "dshgan/datasets.hpp"
#include "dshgan/nn/sequential.hpp"

namespace dshgan {

// Strided-convolution feature extractor shared by the GAN discriminator and
// the hashing encoder: three conv(k3, s2, p1) + LeakyReLU blocks, then one
// dense + LeakyReLU layer of `feature_width` units.
struct TrunkConfig {
  std::array<std::size_t, 3> channels{16, 32, 64};
  std::size_t feature_width = 64;
  double leaky_slope = 0.2;
  double init_std = 0.02;

  bool operator==(const TrunkConfig&) const = default;
};

nn::Sequential make_trunk(const ImageShape& input, const TrunkConfig& cfg, std::mt19937_64& rng);

// Label-conditioned generator: dense projection of [C, z] to a (width, s/4,
// s/4) map, then two stride-2 transposed convolutions up to the image size,
// with a tanh output so pixels stay inside [-1, 1].
struct GeneratorConfig {
  std::size_t noise_dim = 64;
  std::size_t width = 64;
  double leaky_slope = 0.2;
  double init_std = 0.02;

  bool operator==(const GeneratorConfig&) const = default;
};

nn::Sequential make_generator(const ImageShape& output, std::size_t class_count,
                              const GeneratorConfig& cfg, std::mt19937_64& rng);

// Single dense layer head of `out` units on top of a trunk feature.
nn::Sequential make_head(std::size_t feature_width, std::size_t out, double init_std,
                         std::mt19937_64& rng);

}  // namespace dshgan
