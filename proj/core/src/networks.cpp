#include "dshgan/networks.hpp"

#include "dshgan/errors.hpp"

namespace dshgan {

nn::Sequential make_trunk(const ImageShape& input, const TrunkConfig& cfg, std::mt19937_64& rng) {
  require(input.channels > 0 && input.height > 0 && input.width > 0, ErrorKind::kConfiguration,
          "trunk input shape must be nonempty");
  nn::Sequential net;
  std::size_t c = input.channels, h = input.height, w = input.width;
  for (std::size_t out : cfg.channels) {
    net.add(nn::make_conv(c, out, 3, 2, 1, true, cfg.init_std, rng));
    net.add(nn::LeakyRelu{cfg.leaky_slope});
    c = out;
    h = nn::conv_output_size(h, 3, 2, 1);
    w = nn::conv_output_size(w, 3, 2, 1);
  }
  net.add(nn::Flatten{});
  net.add(nn::make_dense(c * h * w, cfg.feature_width, true, cfg.init_std, rng));
  net.add(nn::LeakyRelu{cfg.leaky_slope});
  return net;
}

nn::Sequential make_generator(const ImageShape& output, std::size_t class_count,
                              const GeneratorConfig& cfg, std::mt19937_64& rng) {
  require(output.height % 4 == 0 && output.width % 4 == 0 && output.height >= 4,
          ErrorKind::kConfiguration, "generator needs image sides divisible by 4");
  require(cfg.width >= 2, ErrorKind::kConfiguration, "generator width must be at least 2");
  const std::size_t h0 = output.height / 4, w0 = output.width / 4;
  nn::Sequential net;
  net.add(nn::make_dense(class_count + cfg.noise_dim, cfg.width * h0 * w0, true, cfg.init_std, rng));
  net.add(nn::LeakyRelu{cfg.leaky_slope});
  net.add(nn::Unflatten{{cfg.width, h0, w0}});
  net.add(nn::make_conv_transpose(cfg.width, cfg.width / 2, 4, 2, 1, true, cfg.init_std, rng));
  net.add(nn::LeakyRelu{cfg.leaky_slope});
  net.add(nn::make_conv_transpose(cfg.width / 2, output.channels, 4, 2, 1, true, cfg.init_std, rng));
  net.add(nn::Tanh{});
  return net;
}

nn::Sequential make_head(std::size_t feature_width, std::size_t out, double init_std,
                         std::mt19937_64& rng) {
  nn::Sequential net;
  net.add(nn::make_dense(feature_width, out, true, init_std, rng));
  return net;
}

}  // namespace dshgan
