#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "dshgan/datasets.hpp"
#include "dshgan/gan.hpp"
#include "dshgan/hashmodel.hpp"
#include "dshgan/nn/optim.hpp"
#include "dshgan/triplets.hpp"

namespace dshgan {

using nn::gradient_step;

struct TrainConfig {
  double learning_rate = 1e-4;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
  std::size_t iterations = 3000;
  // Learning rate is multiplied by lr_decay_factor once step >= lr_decay_step.
  std::size_t lr_decay_step = 2000;
  double lr_decay_factor = 0.1;
  // CNN steps per generator step.
  std::size_t update_ratio = 1;
  double synthetic_fraction = 1.0;
  std::uint64_t seed = 1;
  StreamWeights weights;
  bool update_generator = true;
  // Generator steps use learning_rate_at(step) times this factor.
  double generator_lr_scale = 1.0;

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& cfg);
double learning_rate_at(const TrainConfig& cfg, std::size_t step);

struct TrainLogEntry {
  std::size_t step = 0;
  double triplet = 0.0;
  double adversary = 0.0;
  double classification = 0.0;
  double cnn_objective = 0.0;        // shared CNN objective on the step's batch
  double generator_objective = 0.0;  // generator objective on the same batch
  double learning_rate = 0.0;

  bool operator==(const TrainLogEntry&) const = default;
};

struct TrainResult {
  HashModelState model;
  GanState gan;
  std::vector<TrainLogEntry> log;
};

// Alternates one shared-CNN step (minimizing the CNN objective) per cycle with
// one generator step (minimizing the generator objective) every
// `update_ratio` cycles. The GAN discriminator is left untouched.
TrainResult train(const Dataset& labeled, const GanState& gan, const HashModelState& init,
                  const TrainConfig& cfg);

struct ObjectiveGradients {
  double objective = 0.0;
  std::vector<StreamLosses> losses;
  std::vector<Tensor> grads;
};

// d(CNN objective)/d(hash model parameters) on stored triplet images.
ObjectiveGradients cnn_gradients(const HashModelState& model,
                                 std::span<const RealSyntheticTriplet> triplets,
                                 const StreamWeights& weights = {});

// d(generator objective)/d(generator parameters). Synthetic members are
// re-synthesized from their stored labels and noise, so the objective is a
// function of the generator weights.
ObjectiveGradients generator_gradients(const HashModelState& model, const GanState& gan,
                                       std::span<const RealSyntheticTriplet> triplets,
                                       const StreamWeights& weights = {});

// CSV with header: step,triplet_loss,adversary_loss,classification_loss,cnn_objective,generator_objective,lr
std::string training_log_csv(std::span<const TrainLogEntry> log);
void write_training_log_csv(std::span<const TrainLogEntry> log, const std::filesystem::path& path);

}  // namespace dshgan
