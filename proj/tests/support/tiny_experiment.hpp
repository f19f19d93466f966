#pragma once

// A seconds-scale experiment configuration for pipeline tests.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "dshgan/experiment.hpp"

namespace dshgan::testing {

inline ExperimentConfig tiny_experiment(const std::filesystem::path& out, std::size_t gan_iterations = 2,
                                        std::size_t train_iterations = 2) {
  ExperimentConfig cfg;
  cfg.seed = 7;
  cfg.output_dir = out.string();
  cfg.dataset.class_count = 3;
  cfg.dataset.per_class = 24;
  cfg.split.labeled_per_class = 6;
  cfg.split.queries_per_class = 4;
  cfg.gan.iterations = gan_iterations;
  cfg.gan.batch_size = 8;
  cfg.gan.generator.width = 8;
  cfg.gan.generator.noise_dim = 8;
  cfg.gan.discriminator.channels = {4, 4, 8};
  cfg.gan.discriminator.feature_width = 8;
  cfg.hash_trunk = cfg.gan.discriminator;
  cfg.train.iterations = train_iterations;
  cfg.train.batch_size = 4;
  cfg.code_lengths = {12, 48};
  cfg.eval.ks = {1, 5, 10};
  cfg.synthetic_fractions = {0.0, 1.0};
  cfg.samples_per_class = 2;
  return cfg;
}

inline std::string read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative path -> contents for every regular file under `dir`.
inline std::map<std::string, std::string> snapshot(const std::filesystem::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[std::filesystem::relative(e.path(), dir).generic_string()] = read_bytes(e.path());
  return out;
}

}  // namespace dshgan::testing
