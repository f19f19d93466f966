#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "dshgan/container.hpp"
#include "dshgan/datasets.hpp"
#include "dshgan/networks.hpp"
#include "dshgan/nn/sequential.hpp"

namespace dshgan {

using NoiseVector = std::vector<double>;

enum class GeneratorLoss {
  // G minimizes l_c - l_a (the two-player minimax form).
  kMinimax,
  // G minimizes l_c + (-log P(real | G(C, z))), the usual non-saturating variant.
  kNonSaturating,
};

struct GanConfig {
  ImageShape image_shape{3, 8, 8};
  std::size_t class_count = 4;
  LabelMode label_mode = LabelMode::kSingle;
  GeneratorConfig generator;
  TrunkConfig discriminator;

  std::size_t iterations = 1500;
  std::size_t batch_size = 128;
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  // Weights of l_c for real labeled and synthetic images inside D's objective.
  double real_class_weight = 1.0;
  double synthetic_class_weight = 1.0;
  GeneratorLoss generator_loss = GeneratorLoss::kMinimax;
  // Probability that a real slot in D's batch is drawn from the labeled set
  // rather than the unlabeled one (ignored when there are no unlabeled images).
  double labeled_real_fraction = 0.5;

  bool operator==(const GanConfig&) const = default;
};

struct GanState {
  GanConfig config;
  nn::Sequential generator;
  nn::Sequential trunk;
  nn::Sequential source_head;
  nn::Sequential class_head;

  std::vector<nn::NamedTensor> generator_parameters();
  std::vector<nn::ConstNamedTensor> generator_parameters() const;
  // trunk, then source head, then class head
  std::vector<nn::NamedTensor> discriminator_parameters();
  std::vector<nn::ConstNamedTensor> discriminator_parameters() const;

  bool operator==(const GanState&) const = default;
};

struct DiscriminatorOutput {
  double p_source = 0.5;
  // Softmax over classes in single-label mode, per-label sigmoids otherwise.
  std::vector<double> class_scores;
};

GanState init_gan(const GanConfig& cfg, std::uint64_t seed);

NoiseVector sample_noise(std::size_t dim, std::mt19937_64& rng);

ImageExample generate(const GanState& state, const LabelVector& label, const NoiseVector& z);
// [B, C, H, W] images for row-aligned labels and noise vectors.
Tensor generate_batch(const GanState& state, std::span<const LabelVector> labels,
                      std::span<const NoiseVector> noise,
                      nn::Sequential::Trace* trace = nullptr);

DiscriminatorOutput discriminate(const GanState& state, const ImageExample& x);

struct DiscriminatorLogits {
  std::vector<double> source;  // [B]
  Tensor classes;              // [B, c]
};
DiscriminatorLogits discriminator_logits(const GanState& state, const Tensor& images);

struct GanLossTerms {
  double adversarial = 0.0;
  double classification = 0.0;
  double total() const { return adversarial + classification; }
};

// One discriminator batch. A zero label vector means the image has no class
// label, so it contributes only the adversarial term.
struct DiscriminatorBatch {
  Tensor images;
  std::vector<Source> sources;
  std::vector<LabelVector> labels;
};

// Batch means of l_a and (weighted) l_c under D. When `grads` is non-null it
// receives d/dθ_D of their sum in discriminator_parameters() order.
GanLossTerms discriminator_loss(const GanState& state, const DiscriminatorBatch& batch,
                                std::vector<Tensor>* grads = nullptr);

// Generator objective on images synthesized from (labels, noise): batch mean of
// l_c - l_a for the minimax form. `grads` receives d/dθ_G in
// generator_parameters() order.
struct GeneratorObjective {
  GanLossTerms terms;  // adversarial holds the mean l_a of the synthetic images under D
  double objective = 0.0;
};
GeneratorObjective generator_loss(const GanState& state, std::span<const LabelVector> labels,
                                  std::span<const NoiseVector> noise,
                                  std::vector<Tensor>* grads = nullptr);

struct GanLogEntry {
  std::size_t step = 0;
  double d_adversarial = 0.0;
  double d_classification = 0.0;
  double g_objective = 0.0;
};

GanState pretrain_gan(const Dataset& labeled, const Dataset& unlabeled, const GanConfig& cfg,
                      std::uint64_t seed, std::vector<GanLogEntry>* log = nullptr);

// Fraction of labeled examples whose arg-max class under D is a true label.
double discriminator_class_accuracy(const GanState& state, const Dataset& ds);
// Accuracy of P(S|x) > 0.5 over the given real images plus an equal number of
// fresh synthetic images.
double discriminator_source_accuracy(const GanState& state, const Dataset& reals,
                                     const Dataset& label_source, std::uint64_t seed);

ArrayContainer to_container(const GanState& state);
GanState gan_from_container(const ArrayContainer& container);

}  // namespace dshgan
