#pragma once

// Tiny double-precision networks for gradient checks and loss oracles.

#include <algorithm>
#include <cstdint>
#include <vector>

#include "dshgan/datasets.hpp"
#include "dshgan/gan.hpp"
#include "dshgan/hashmodel.hpp"
#include "dshgan/triplets.hpp"

namespace dshgan::testing {

struct MicroSetup {
  GanState gan;
  HashModelState model;
  Dataset labeled;
  std::vector<RealSyntheticTriplet> triplets;
};

inline TrunkConfig micro_trunk(double init_std) {
  TrunkConfig t;
  t.channels = {2, 2, 3};
  t.feature_width = 4;
  t.init_std = init_std;
  return t;
}

inline MicroSetup make_micro(std::uint64_t seed, LabelMode mode, double synthetic_fraction = 0.5,
                             std::size_t triplet_count = 3, double init_std = 0.3) {
  MicroSetup s;
  const std::size_t c = mode == LabelMode::kSingle ? 3 : 4;
  s.labeled = make_toy_dataset(c, 3, 8, mode, seed);
  if (mode == LabelMode::kMulti) {
    // Fixed label sets so every query has a disjoint negative set.
    for (std::size_t i = 0; i < s.labeled.size(); ++i) {
      std::vector<std::size_t> classes{i % c};
      if (i % 2 == 1) classes.push_back((i + 1) % c);
      std::sort(classes.begin(), classes.end());
      s.labeled.examples[i].label = LabelVector::from_indices(c, classes);
      s.labeled.examples[i].true_label = s.labeled.examples[i].label;
    }
  }

  GanConfig g;
  g.image_shape = s.labeled.image_shape;
  g.class_count = c;
  g.label_mode = mode;
  g.generator.noise_dim = 3;
  g.generator.width = 4;
  g.generator.init_std = init_std;
  g.discriminator = micro_trunk(init_std);
  g.iterations = 0;
  s.gan = init_gan(g, seed + 101);

  HashModelConfig h;
  h.image_shape = s.labeled.image_shape;
  h.class_count = c;
  h.label_mode = mode;
  h.code_length = 4;
  h.trunk = micro_trunk(init_std);
  s.model = init_hash_model(h, seed + 202);

  s.triplets = sample_triplets(s.labeled, s.gan, triplet_count, synthetic_fraction, seed + 303);
  return s;
}

inline std::vector<Tensor*> pointers(std::vector<nn::NamedTensor> named) {
  std::vector<Tensor*> out;
  for (auto& n : named) out.push_back(n.value);
  return out;
}

}  // namespace dshgan::testing
