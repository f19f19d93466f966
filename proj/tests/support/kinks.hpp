#pragma once

// Sign patterns of every non-differentiable point the training losses pass
// through: leaky-ReLU inputs and the triplet hinge argument. A central
// difference whose stencil flips any sign straddles a kink and is not a valid
// reference for the analytic gradient.

#include <variant>
#include <vector>

#include "dshgan/gan.hpp"
#include "dshgan/hashmodel.hpp"

namespace dshgan::testing {

using SignPattern = std::vector<bool>;

// Runs `net` on `input`, appending the sign of every leaky-ReLU input.
inline Tensor forward_signs(const nn::Sequential& net, const Tensor& input, SignPattern& out) {
  nn::Sequential::Trace trace;
  Tensor y = net.forward(input, trace);
  for (std::size_t i = 0; i < net.layer_count(); ++i)
    if (std::holds_alternative<nn::LeakyRelu>(net.layer(i)))
      for (double v : trace.activations[i].values()) out.push_back(v > 0.0);
  return y;
}

inline void discriminator_signs(const GanState& gan, const Tensor& images, SignPattern& out) {
  const Tensor f = forward_signs(gan.trunk, images, out);
  forward_signs(gan.source_head, f, out);
  forward_signs(gan.class_head, f, out);
}

inline Tensor generator_signs(const GanState& gan, std::span<const LabelVector> labels,
                              std::span<const NoiseVector> noise, SignPattern& out) {
  nn::Sequential::Trace trace;
  Tensor images = generate_batch(gan, labels, noise, &trace);
  for (std::size_t l = 0; l < gan.generator.layer_count(); ++l)
    if (std::holds_alternative<nn::LeakyRelu>(gan.generator.layer(l)))
      for (double v : trace.activations[l].values()) out.push_back(v > 0.0);
  return images;
}

inline Tensor hash_signs(const HashModelState& model, const Tensor& images, SignPattern& out) {
  const Tensor f = forward_signs(model.encoder, images, out);
  forward_signs(model.adversary_head, f, out);
  forward_signs(model.class_head, f, out);
  return forward_signs(model.hash_head, f, out);
}

inline SignPattern triplet_batch_signs(const HashModelState& model, const TripletBatch& batch) {
  SignPattern out;
  const Tensor h = hash_signs(model, batch.queries, out);
  const Tensor hp = hash_signs(model, batch.positives, out);
  const Tensor hn = hash_signs(model, batch.negatives, out);
  const std::size_t k = model.config.code_length;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    double arg = 1.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double q = h[i * k + j], p = hp[i * k + j], n = hn[i * k + j];
      arg += (q - p) * (q - p) - (q - n) * (q - n);
    }
    out.push_back(arg > 0.0);
  }
  return out;
}

// Generator signs for the synthetic members, then the hashing network on the
// batch with those members re-synthesized.
inline SignPattern generator_objective_signs(const HashModelState& model, const GanState& gan,
                                             std::span<const RealSyntheticTriplet> triplets) {
  const ImageShape& shape = model.config.image_shape;
  TripletBatch batch = make_triplet_batch(triplets, shape);
  const std::size_t n = shape.pixel_count();
  SignPattern out;
  for (std::size_t i = 0; i < triplets.size(); ++i) {
    const RealSyntheticTriplet& t = triplets[i];
    const auto resynthesize = [&](const ImageExample& member, const NoiseVector& z, Tensor& dst) {
      if (member.source != Source::kSynthetic) return;
      const std::vector<LabelVector> labels{member.label};
      const std::vector<NoiseVector> noise{z};
      const Tensor img = generator_signs(gan, labels, noise, out);
      std::copy(img.data(), img.data() + n, dst.data() + i * n);
    };
    resynthesize(t.positive, t.positive_noise, batch.positives);
    resynthesize(t.negative, t.negative_noise, batch.negatives);
  }
  const SignPattern rest = triplet_batch_signs(model, batch);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

}  // namespace dshgan::testing
