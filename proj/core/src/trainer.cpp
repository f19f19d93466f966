#include "dshgan/trainer.hpp"

#include <cmath>
#include <cstdio>

#include "binary_io.hpp"
#include "dshgan/errors.hpp"

namespace dshgan {
namespace {

std::vector<Tensor*> values_of(std::vector<nn::NamedTensor> named) {
  std::vector<Tensor*> out;
  for (auto& n : named) out.push_back(n.value);
  return out;
}

void check_finite(std::size_t step, const std::vector<StreamLosses>& losses) {
  double t = 0.0, a = 0.0, c = 0.0;
  for (const StreamLosses& l : losses) {
    t += l.triplet;
    a += l.adversary;
    c += l.classification;
  }
  const auto at = " at step " + std::to_string(step);
  require(std::isfinite(t), ErrorKind::kDivergence, "non-finite triplet loss" + at);
  require(std::isfinite(a), ErrorKind::kDivergence, "non-finite adversary loss" + at);
  require(std::isfinite(c), ErrorKind::kDivergence, "non-finite classification loss" + at);
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void validate(const TrainConfig& cfg) {
  require(cfg.learning_rate > 0.0 && cfg.momentum >= 0.0 && cfg.weight_decay >= 0.0,
          ErrorKind::kConfiguration, "learning rate must be > 0; momentum and decay >= 0");
  require(cfg.batch_size >= 1, ErrorKind::kConfiguration, "batch_size must be >= 1");
  require(cfg.update_ratio >= 1, ErrorKind::kConfiguration, "update_ratio must be >= 1");
  require(cfg.lr_decay_factor > 0.0, ErrorKind::kConfiguration, "lr_decay_factor must be > 0");
  require(cfg.generator_lr_scale >= 0.0, ErrorKind::kConfiguration, "generator_lr_scale must be >= 0");
  require(cfg.synthetic_fraction >= 0.0 && cfg.synthetic_fraction <= 1.0,
          ErrorKind::kConfiguration, "synthetic_fraction must lie in [0, 1]");
}

double learning_rate_at(const TrainConfig& cfg, std::size_t step) {
  return step >= cfg.lr_decay_step ? cfg.learning_rate * cfg.lr_decay_factor : cfg.learning_rate;
}

ObjectiveGradients cnn_gradients(const HashModelState& model,
                                 std::span<const RealSyntheticTriplet> triplets,
                                 const StreamWeights& weights) {
  const TripletBatch batch = make_triplet_batch(triplets, model.config.image_shape);
  BatchEvaluation eval = evaluate_triplet_batch(model, batch, Objective::kCnn, weights, true, false);
  return {eval.objective, std::move(eval.losses), std::move(eval.param_grads)};
}

ObjectiveGradients generator_gradients(const HashModelState& model, const GanState& gan,
                                       std::span<const RealSyntheticTriplet> triplets,
                                       const StreamWeights& weights) {
  const ImageShape& shape = model.config.image_shape;
  require(shape == gan.config.image_shape, ErrorKind::kShape,
          "generator and hash model disagree on the image shape");
  TripletBatch batch = make_triplet_batch(triplets, shape);
  const std::size_t b = triplets.size(), n = shape.pixel_count();

  // Synthetic members in (row, is_positive) order, re-synthesized with a trace.
  struct Member {
    std::size_t row;
    bool positive;
  };
  std::vector<Member> members;
  std::vector<LabelVector> labels;
  std::vector<NoiseVector> noise;
  for (std::size_t i = 0; i < b; ++i) {
    const RealSyntheticTriplet& t = triplets[i];
    if (t.positive.source == Source::kSynthetic) {
      members.push_back({i, true});
      labels.push_back(t.positive.label);
      noise.push_back(t.positive_noise);
    }
    if (t.negative.source == Source::kSynthetic) {
      members.push_back({i, false});
      labels.push_back(t.negative.label);
      noise.push_back(t.negative_noise);
    }
  }

  ObjectiveGradients out;
  for (const auto& p : gan.generator_parameters()) out.grads.emplace_back(p.value->shape());
  nn::Sequential::Trace trace;
  Tensor images;
  if (!members.empty()) {
    images = generate_batch(gan, labels, noise, &trace);
    for (std::size_t m = 0; m < members.size(); ++m) {
      Tensor& dst = members[m].positive ? batch.positives : batch.negatives;
      std::copy(images.data() + m * n, images.data() + (m + 1) * n,
                dst.data() + members[m].row * n);
    }
  }
  BatchEvaluation eval = evaluate_triplet_batch(model, batch, Objective::kGenerator, weights,
                                                false, !members.empty());
  out.objective = eval.objective;
  out.losses = std::move(eval.losses);
  if (members.empty()) return out;

  Tensor d_images(images.shape());
  for (std::size_t m = 0; m < members.size(); ++m) {
    const Tensor& src = members[m].positive ? eval.d_positives : eval.d_negatives;
    std::copy(src.data() + members[m].row * n, src.data() + (members[m].row + 1) * n,
              d_images.data() + m * n);
  }
  gan.generator.backward(trace, d_images, out.grads, false);
  return out;
}

TrainResult train(const Dataset& labeled, const GanState& gan, const HashModelState& init,
                  const TrainConfig& cfg) {
  validate(cfg);
  require(labeled.class_count == init.config.class_count &&
              labeled.image_shape == init.config.image_shape,
          ErrorKind::kConfiguration, "labeled data does not match the hash model configuration");
  require(gan.config.class_count == init.config.class_count &&
              gan.config.image_shape == init.config.image_shape,
          ErrorKind::kConfiguration, "GAN does not match the hash model configuration");

  TrainResult result{init, gan, {}};
  if (cfg.iterations == 0) return result;
  result.log.reserve(cfg.iterations);

  std::mt19937_64 rng(cfg.seed);
  nn::MomentumSgd cnn_opt({cfg.learning_rate, cfg.momentum, cfg.weight_decay});
  nn::MomentumSgd gen_opt({cfg.learning_rate, cfg.momentum, 0.0});

  for (std::size_t step = 0; step < cfg.iterations; ++step) {
    const double lr = learning_rate_at(cfg, step);
    const std::uint64_t batch_seed = rng();
    const std::vector<RealSyntheticTriplet> triplets =
        sample_triplets(labeled, result.gan, cfg.batch_size, cfg.synthetic_fraction, batch_seed);

    const ObjectiveGradients cnn = cnn_gradients(result.model, triplets, cfg.weights);
    check_finite(step, cnn.losses);
    TrainLogEntry entry;
    entry.step = step;
    for (const StreamLosses& l : cnn.losses) {
      entry.triplet += l.triplet;
      entry.adversary += l.adversary;
      entry.classification += l.classification;
    }
    const double inv = 1.0 / static_cast<double>(cnn.losses.size());
    entry.triplet *= inv;
    entry.adversary *= inv;
    entry.classification *= inv;
    entry.cnn_objective = cnn.objective;
    entry.generator_objective = generator_objective(cnn.losses, cfg.weights);
    entry.learning_rate = lr;
    require(std::isfinite(entry.cnn_objective), ErrorKind::kDivergence,
            "non-finite CNN objective at step " + std::to_string(step));

    cnn_opt.set_learning_rate(lr);
    cnn_opt.step(values_of(result.model.parameters()), cnn.grads);

    if (cfg.update_generator && (step + 1) % cfg.update_ratio == 0) {
      const ObjectiveGradients gen = generator_gradients(result.model, result.gan, triplets, cfg.weights);
      require(std::isfinite(gen.objective), ErrorKind::kDivergence,
              "non-finite generator objective at step " + std::to_string(step));
      gen_opt.set_learning_rate(lr * cfg.generator_lr_scale);
      gen_opt.step(values_of(result.gan.generator_parameters()), gen.grads);
    }
    result.log.push_back(entry);
  }
  return result;
}

std::string training_log_csv(std::span<const TrainLogEntry> log) {
  std::string out = "step,triplet_loss,adversary_loss,classification_loss,cnn_objective,generator_objective,lr\n";
  for (const TrainLogEntry& e : log) {
    out += std::to_string(e.step) + "," + format_double(e.triplet) + "," +
           format_double(e.adversary) + "," + format_double(e.classification) + "," +
           format_double(e.cnn_objective) + "," + format_double(e.generator_objective) + "," +
           format_double(e.learning_rate) + "\n";
  }
  return out;
}

void write_training_log_csv(std::span<const TrainLogEntry> log, const std::filesystem::path& path) {
  detail::write_file_bytes(path.string(), training_log_csv(log));
}

}  // namespace dshgan
