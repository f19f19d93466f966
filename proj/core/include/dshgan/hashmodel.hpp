#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dshgan/container.hpp"
#include "dshgan/datasets.hpp"
#include "dshgan/gan.hpp"
#include "dshgan/networks.hpp"
#include "dshgan/triplets.hpp"

namespace dshgan {

// Output of the hash stream: K values in [0, 1] before quantization.
using RelaxedCode = std::vector<double>;

struct HashModelConfig {
  ImageShape image_shape{3, 8, 8};
  std::size_t class_count = 4;
  LabelMode label_mode = LabelMode::kSingle;
  std::size_t code_length = 12;
  TrunkConfig trunk;

  bool operator==(const HashModelConfig&) const = default;
};

// Shared encoder with three heads: hash (dense + sigmoid, K units), adversary
// (one source logit) and classifier (c logits; softmax or per-label sigmoid).
struct HashModelState {
  HashModelConfig config;
  nn::Sequential encoder;
  nn::Sequential hash_head;
  nn::Sequential adversary_head;
  nn::Sequential class_head;

  // encoder, hash head, adversary head, classifier head
  std::vector<nn::NamedTensor> parameters();
  std::vector<nn::ConstNamedTensor> parameters() const;

  bool operator==(const HashModelState&) const = default;
};

struct StreamLosses {
  double triplet = 0.0;
  double adversary = 0.0;
  double classification = 0.0;
};

// Optional per-stream multipliers; all ones reproduces the unweighted sums.
struct StreamWeights {
  double triplet = 1.0;
  double adversary = 1.0;
  double classification = 1.0;

  bool operator==(const StreamWeights&) const = default;
};

HashModelState init_hash_model(const HashModelConfig& cfg, std::uint64_t seed);

struct DiscriminatorTransfer {
  bool encoder = true;
  bool adversary_head = true;
  bool class_head = true;
};
struct TransferReport {
  bool encoder = false;
  bool adversary_head = false;
  bool class_head = false;
};
// Copies pretrained discriminator weights into the matching parts of the
// hashing model wherever the shapes agree.
TransferReport transfer_from_discriminator(HashModelState& model, const GanState& gan,
                                           const DiscriminatorTransfer& what = {});

std::vector<double> embed(const HashModelState& state, const ImageExample& x);
RelaxedCode hash_forward(const HashModelState& state, const ImageExample& x);
// [B, K] relaxed codes for a [B, C, H, W] batch.
Tensor hash_forward_batch(const HashModelState& state, const Tensor& images);

StreamLosses triplet_stream_losses(const HashModelState& state, const RealSyntheticTriplet& t);

// Batch mean of (triplet + adversary + classification).
double cnn_objective(std::span<const StreamLosses> losses, const StreamWeights& w = {});
// Batch mean of (triplet - adversary + classification).
double generator_objective(std::span<const StreamLosses> losses, const StreamWeights& w = {});

struct TripletBatch {
  Tensor queries;    // [B, C, H, W]
  Tensor positives;  // [B, C, H, W]
  Tensor negatives;  // [B, C, H, W]
  std::vector<LabelVector> query_labels;
  std::vector<LabelVector> positive_labels;
  std::vector<LabelVector> negative_labels;
  std::vector<Source> positive_sources;
  std::vector<Source> negative_sources;

  std::size_t size() const noexcept { return query_labels.size(); }
};

TripletBatch make_triplet_batch(std::span<const RealSyntheticTriplet> triplets,
                                const ImageShape& shape);

enum class Objective { kCnn, kGenerator };

struct BatchEvaluation {
  std::vector<StreamLosses> losses;
  double objective = 0.0;
  // In parameters() order; empty unless requested.
  std::vector<Tensor> param_grads;
  // d objective / d image for each member; empty unless requested.
  Tensor d_queries;
  Tensor d_positives;
  Tensor d_negatives;
};

BatchEvaluation evaluate_triplet_batch(const HashModelState& state, const TripletBatch& batch,
                                       Objective objective, const StreamWeights& weights,
                                       bool want_param_grads, bool want_input_grads);

ArrayContainer to_container(const HashModelState& state);
HashModelState hash_model_from_container(const ArrayContainer& container);

}  // namespace dshgan
