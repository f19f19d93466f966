#include "dshgan/gan.hpp"

#include <algorithm>
#include <cmath>

#include "dshgan/errors.hpp"
#include "dshgan/losses.hpp"
#include "dshgan/nn/optim.hpp"
#include "json_config.hpp"

namespace dshgan {
namespace {

void append(std::vector<nn::NamedTensor>& out, std::vector<nn::NamedTensor> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}
void append(std::vector<nn::ConstNamedTensor>& out, std::vector<nn::ConstNamedTensor> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

struct DiscriminatorPass {
  nn::Sequential::Trace trunk;
  nn::Sequential::Trace source;
  nn::Sequential::Trace classes;
  Tensor source_logits;  // [B, 1]
  Tensor class_logits;   // [B, c]
};

DiscriminatorPass forward_discriminator(const GanState& s, const Tensor& images) {
  DiscriminatorPass pass;
  const Tensor features = s.trunk.forward(images, pass.trunk);
  pass.source_logits = s.source_head.forward(features, pass.source);
  pass.class_logits = s.class_head.forward(features, pass.classes);
  return pass;
}

// Backpropagates head-logit gradients; accumulates into `grads` (may be null)
// and returns the image gradient when requested.
Tensor backward_discriminator(const GanState& s, const DiscriminatorPass& pass,
                              const Tensor& d_source, const Tensor& d_classes,
                              std::vector<Tensor>* grads, bool need_input) {
  std::span<Tensor> all;
  if (grads) all = *grads;
  const std::size_t nt = s.trunk.parameter_tensor_count();
  const std::size_t ns = s.source_head.parameter_tensor_count();
  const std::size_t nc = s.class_head.parameter_tensor_count();
  auto part = [&](std::size_t offset, std::size_t count) {
    return all.empty() ? std::span<Tensor>() : all.subspan(offset, count);
  };
  Tensor d_features = s.source_head.backward(pass.source, d_source, part(nt, ns));
  const Tensor d_from_classes = s.class_head.backward(pass.classes, d_classes, part(nt + ns, nc));
  for (std::size_t i = 0; i < d_features.size(); ++i) d_features[i] += d_from_classes[i];
  return s.trunk.backward(pass.trunk, d_features, part(0, nt), need_input);
}

Tensor generator_input(const GanState& s, std::span<const LabelVector> labels,
                       std::span<const NoiseVector> noise) {
  const GanConfig& cfg = s.config;
  require(labels.size() == noise.size(), ErrorKind::kShape, "label and noise counts differ");
  const std::size_t width = cfg.class_count + cfg.generator.noise_dim;
  Tensor input({labels.size(), width});
  for (std::size_t r = 0; r < labels.size(); ++r) {
    require(labels[r].size() == cfg.class_count, ErrorKind::kShape,
            "label has " + std::to_string(labels[r].size()) + " entries, expected " +
                std::to_string(cfg.class_count));
    require(noise[r].size() == cfg.generator.noise_dim, ErrorKind::kShape,
            "noise has " + std::to_string(noise[r].size()) + " entries, expected " +
                std::to_string(cfg.generator.noise_dim));
    double* row = input.data() + r * width;
    for (std::size_t j = 0; j < cfg.class_count; ++j) row[j] = labels[r][j] ? 1.0 : 0.0;
    std::copy(noise[r].begin(), noise[r].end(), row + cfg.class_count);
  }
  return input;
}

std::vector<Tensor*> values_of(std::vector<nn::NamedTensor> named) {
  std::vector<Tensor*> out;
  for (auto& n : named) out.push_back(n.value);
  return out;
}

std::vector<Tensor> zeros_like(const std::vector<nn::ConstNamedTensor>& named) {
  std::vector<Tensor> out;
  for (const auto& n : named) out.emplace_back(n.value->shape());
  return out;
}

const LabelVector& draw_label(const Dataset& labeled, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);
  return labeled.examples[pick(rng)].label;
}

}  // namespace

std::vector<nn::NamedTensor> GanState::generator_parameters() {
  return generator.parameters("generator.");
}
std::vector<nn::ConstNamedTensor> GanState::generator_parameters() const {
  return generator.parameters("generator.");
}

std::vector<nn::NamedTensor> GanState::discriminator_parameters() {
  auto out = trunk.parameters("discriminator.trunk.");
  append(out, source_head.parameters("discriminator.source_head."));
  append(out, class_head.parameters("discriminator.class_head."));
  return out;
}
std::vector<nn::ConstNamedTensor> GanState::discriminator_parameters() const {
  auto out = trunk.parameters("discriminator.trunk.");
  append(out, source_head.parameters("discriminator.source_head."));
  append(out, class_head.parameters("discriminator.class_head."));
  return out;
}

GanState init_gan(const GanConfig& cfg, std::uint64_t seed) {
  require(cfg.class_count >= 1, ErrorKind::kConfiguration, "GAN needs at least one class");
  require(cfg.generator.noise_dim >= 1, ErrorKind::kConfiguration, "noise dimension must be >= 1");
  std::mt19937_64 rng(seed);
  GanState s;
  s.config = cfg;
  s.generator = make_generator(cfg.image_shape, cfg.class_count, cfg.generator, rng);
  s.trunk = make_trunk(cfg.image_shape, cfg.discriminator, rng);
  s.source_head = make_head(cfg.discriminator.feature_width, 1, cfg.discriminator.init_std, rng);
  s.class_head =
      make_head(cfg.discriminator.feature_width, cfg.class_count, cfg.discriminator.init_std, rng);
  return s;
}

NoiseVector sample_noise(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  NoiseVector z(dim);
  for (double& v : z) v = normal(rng);
  return z;
}

Tensor generate_batch(const GanState& state, std::span<const LabelVector> labels,
                      std::span<const NoiseVector> noise, nn::Sequential::Trace* trace) {
  const Tensor input = generator_input(state, labels, noise);
  return trace ? state.generator.forward(input, *trace) : state.generator.forward(input);
}

ImageExample generate(const GanState& state, const LabelVector& label, const NoiseVector& z) {
  const Tensor images = generate_batch(state, std::span(&label, 1), std::span(&z, 1));
  ImageExample ex;
  ex.pixels = images.storage();
  ex.label = label;
  ex.true_label = label;
  ex.is_labeled = !label.is_zero();
  ex.source = Source::kSynthetic;
  return ex;
}

DiscriminatorLogits discriminator_logits(const GanState& state, const Tensor& images) {
  const ImageShape& shape = state.config.image_shape;
  require(images.rank() == 4 && images.dim(1) == shape.channels && images.dim(2) == shape.height &&
              images.dim(3) == shape.width,
          ErrorKind::kShape, "discriminator input has shape " + shape_string(images.shape()));
  const Tensor features = state.trunk.forward(images);
  const Tensor source = state.source_head.forward(features);
  return {source.storage(), state.class_head.forward(features)};
}

DiscriminatorOutput discriminate(const GanState& state, const ImageExample& x) {
  const ImageShape& shape = state.config.image_shape;
  require(x.pixels.size() == shape.pixel_count(), ErrorKind::kShape,
          "image has " + std::to_string(x.pixels.size()) + " values, expected " +
              std::to_string(shape.pixel_count()));
  const Tensor images({1, shape.channels, shape.height, shape.width}, x.pixels);
  const DiscriminatorLogits logits = discriminator_logits(state, images);
  DiscriminatorOutput out;
  out.p_source = sigmoid(logits.source[0]);
  if (state.config.label_mode == LabelMode::kSingle) {
    out.class_scores = softmax(logits.classes.values());
  } else {
    for (double a : logits.classes.values()) out.class_scores.push_back(sigmoid(a));
  }
  return out;
}

GanLossTerms discriminator_loss(const GanState& state, const DiscriminatorBatch& batch,
                                std::vector<Tensor>* grads) {
  const std::size_t n = batch.sources.size();
  require(n > 0 && batch.labels.size() == n && batch.images.rank() == 4 &&
              batch.images.dim(0) == n,
          ErrorKind::kShape, "discriminator batch fields disagree in length");
  const GanConfig& cfg = state.config;
  const DiscriminatorPass pass = forward_discriminator(state, batch.images);
  const double inv = 1.0 / static_cast<double>(n);
  Tensor d_source({n, 1});
  Tensor d_classes({n, cfg.class_count});
  std::vector<double> row_grad(cfg.class_count);
  GanLossTerms terms;
  for (std::size_t i = 0; i < n; ++i) {
    const ScalarLoss la = adversarial_loss_from_logit(pass.source_logits[i], batch.sources[i]);
    terms.adversarial += la.value * inv;
    d_source[i] = la.grad * inv;
    if (batch.labels[i].is_zero()) continue;
    const double weight = batch.sources[i] == Source::kReal ? cfg.real_class_weight
                                                            : cfg.synthetic_class_weight;
    const std::span<const double> logits(pass.class_logits.data() + i * cfg.class_count,
                                         cfg.class_count);
    const double lc =
        classification_loss_from_logits(logits, batch.labels[i], cfg.label_mode, row_grad);
    terms.classification += weight * lc * inv;
    for (std::size_t j = 0; j < cfg.class_count; ++j)
      d_classes[i * cfg.class_count + j] = weight * row_grad[j] * inv;
  }
  if (grads) {
    if (grads->empty()) *grads = zeros_like(state.discriminator_parameters());
    backward_discriminator(state, pass, d_source, d_classes, grads, false);
  }
  return terms;
}

GeneratorObjective generator_loss(const GanState& state, std::span<const LabelVector> labels,
                                  std::span<const NoiseVector> noise, std::vector<Tensor>* grads) {
  const std::size_t n = labels.size();
  require(n > 0, ErrorKind::kEmptyInput, "generator batch is empty");
  const GanConfig& cfg = state.config;
  nn::Sequential::Trace gen_trace;
  const Tensor images = generate_batch(state, labels, noise, grads ? &gen_trace : nullptr);
  const DiscriminatorPass pass = forward_discriminator(state, images);
  const double inv = 1.0 / static_cast<double>(n);
  const bool minimax = cfg.generator_loss == GeneratorLoss::kMinimax;
  Tensor d_source({n, 1});
  Tensor d_classes({n, cfg.class_count});
  std::vector<double> row_grad(cfg.class_count);
  GeneratorObjective out;
  for (std::size_t i = 0; i < n; ++i) {
    const ScalarLoss la = adversarial_loss_from_logit(pass.source_logits[i], Source::kSynthetic);
    out.terms.adversarial += la.value * inv;
    if (minimax) {
      out.objective -= la.value * inv;
      d_source[i] = -la.grad * inv;
    } else {
      const ScalarLoss fooled = adversarial_loss_from_logit(pass.source_logits[i], Source::kReal);
      out.objective += fooled.value * inv;
      d_source[i] = fooled.grad * inv;
    }
    const std::span<const double> logits(pass.class_logits.data() + i * cfg.class_count,
                                         cfg.class_count);
    const double lc = classification_loss_from_logits(logits, labels[i], cfg.label_mode, row_grad);
    out.terms.classification += lc * inv;
    out.objective += lc * inv;
    for (std::size_t j = 0; j < cfg.class_count; ++j)
      d_classes[i * cfg.class_count + j] = row_grad[j] * inv;
  }
  if (grads) {
    const Tensor d_images = backward_discriminator(state, pass, d_source, d_classes, nullptr, true);
    if (grads->empty()) *grads = zeros_like(state.generator_parameters());
    state.generator.backward(gen_trace, d_images, *grads, false);
  }
  return out;
}

GanState pretrain_gan(const Dataset& labeled, const Dataset& unlabeled, const GanConfig& cfg,
                      std::uint64_t seed, std::vector<GanLogEntry>* log) {
  require(cfg.class_count > 0, ErrorKind::kConfiguration, "GAN configured with zero classes");
  require(!labeled.empty(), ErrorKind::kConfiguration, "GAN pretraining needs labeled images");
  require(labeled.class_count == cfg.class_count &&
              (unlabeled.empty() || unlabeled.class_count == cfg.class_count),
          ErrorKind::kConfiguration, "dataset class count differs from GAN configuration");
  require(labeled.image_shape == cfg.image_shape &&
              (unlabeled.empty() || unlabeled.image_shape == cfg.image_shape),
          ErrorKind::kConfiguration, "dataset image shape differs from GAN configuration");
  require(cfg.batch_size >= 1, ErrorKind::kConfiguration, "batch_size must be >= 1");

  GanState state = init_gan(cfg, seed);
  if (cfg.iterations == 0) return state;

  require(cfg.labeled_real_fraction >= 0.0 && cfg.labeled_real_fraction <= 1.0,
          ErrorKind::kConfiguration, "labeled_real_fraction must lie in [0, 1]");

  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution from_labeled(unlabeled.empty() ? 1.0 : cfg.labeled_real_fraction);
  std::uniform_int_distribution<std::size_t> pick_labeled(0, labeled.size() - 1);
  std::uniform_int_distribution<std::size_t> pick_unlabeled(0, unlabeled.empty() ? 0 : unlabeled.size() - 1);
  const nn::AdamConfig adam{cfg.learning_rate, cfg.beta1, cfg.beta2, 1e-8};
  nn::Adam d_opt(adam), g_opt(adam);
  const std::size_t pixels = cfg.image_shape.pixel_count();

  for (std::size_t step = 0; step < cfg.iterations; ++step) {
    // Discriminator: each slot is real or synthetic with equal probability.
    DiscriminatorBatch batch;
    batch.images = Tensor({cfg.batch_size, cfg.image_shape.channels, cfg.image_shape.height,
                           cfg.image_shape.width});
    std::vector<std::size_t> synthetic_rows;
    std::vector<LabelVector> synthetic_labels;
    std::vector<NoiseVector> synthetic_noise;
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      if (coin(rng)) {
        const ImageExample& ex = from_labeled(rng) ? labeled.examples[pick_labeled(rng)]
                                                   : unlabeled.examples[pick_unlabeled(rng)];
        std::copy(ex.pixels.begin(), ex.pixels.end(), batch.images.data() + i * pixels);
        batch.sources.push_back(Source::kReal);
        batch.labels.push_back(ex.label);
      } else {
        synthetic_rows.push_back(i);
        synthetic_labels.push_back(draw_label(labeled, rng));
        synthetic_noise.push_back(sample_noise(cfg.generator.noise_dim, rng));
        batch.sources.push_back(Source::kSynthetic);
        batch.labels.push_back(synthetic_labels.back());
      }
    }
    if (!synthetic_rows.empty()) {
      const Tensor fake = generate_batch(state, synthetic_labels, synthetic_noise);
      for (std::size_t k = 0; k < synthetic_rows.size(); ++k)
        std::copy(fake.data() + k * pixels, fake.data() + (k + 1) * pixels,
                  batch.images.data() + synthetic_rows[k] * pixels);
    }
    std::vector<Tensor> d_grads;
    const GanLossTerms d_terms = discriminator_loss(state, batch, &d_grads);
    d_opt.step(values_of(state.discriminator_parameters()), d_grads);

    // Generator: a fresh batch of label-conditioned samples.
    std::vector<LabelVector> labels;
    std::vector<NoiseVector> noise;
    for (std::size_t i = 0; i < cfg.batch_size; ++i) {
      labels.push_back(draw_label(labeled, rng));
      noise.push_back(sample_noise(cfg.generator.noise_dim, rng));
    }
    std::vector<Tensor> g_grads;
    const GeneratorObjective g = generator_loss(state, labels, noise, &g_grads);
    g_opt.step(values_of(state.generator_parameters()), g_grads);

    if (!std::isfinite(d_terms.total()) || !std::isfinite(g.objective))
      fail(ErrorKind::kDivergence, "GAN pretraining diverged at step " + std::to_string(step));
    if (log) log->push_back({step, d_terms.adversarial, d_terms.classification, g.objective});
  }
  return state;
}

double discriminator_class_accuracy(const GanState& state, const Dataset& ds) {
  require(!ds.empty(), ErrorKind::kEmptyInput, "accuracy over an empty dataset");
  std::size_t correct = 0, counted = 0;
  constexpr std::size_t kChunk = 256;
  for (std::size_t begin = 0; begin < ds.size(); begin += kChunk) {
    std::vector<std::size_t> rows;
    for (std::size_t i = begin; i < std::min(ds.size(), begin + kChunk); ++i) rows.push_back(i);
    const DiscriminatorLogits logits = discriminator_logits(state, to_batch(ds, rows));
    const std::size_t c = state.config.class_count;
    for (std::size_t r = 0; r < rows.size(); ++r) {
      const ImageExample& ex = ds.examples[rows[r]];
      const LabelVector& truth = ex.is_labeled ? ex.label : ex.true_label;
      if (truth.is_zero()) continue;
      const double* row = logits.classes.data() + r * c;
      const auto best = static_cast<std::size_t>(std::max_element(row, row + c) - row);
      correct += truth[best] ? 1 : 0;
      ++counted;
    }
  }
  require(counted > 0, ErrorKind::kEmptyInput, "no labeled examples to score");
  return static_cast<double>(correct) / static_cast<double>(counted);
}

double discriminator_source_accuracy(const GanState& state, const Dataset& reals,
                                     const Dataset& label_source, std::uint64_t seed) {
  require(!reals.empty() && !label_source.empty(), ErrorKind::kEmptyInput,
          "source accuracy needs real images and a label source");
  std::mt19937_64 rng(seed);
  std::size_t correct = 0;
  std::vector<std::size_t> rows(reals.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  const DiscriminatorLogits real_logits = discriminator_logits(state, to_batch(reals, rows));
  for (double a : real_logits.source) correct += a > 0.0 ? 1 : 0;
  std::vector<LabelVector> labels;
  std::vector<NoiseVector> noise;
  for (std::size_t i = 0; i < reals.size(); ++i) {
    labels.push_back(draw_label(label_source, rng));
    noise.push_back(sample_noise(state.config.generator.noise_dim, rng));
  }
  const DiscriminatorLogits fake_logits =
      discriminator_logits(state, generate_batch(state, labels, noise));
  for (double a : fake_logits.source) correct += a > 0.0 ? 0 : 1;
  return static_cast<double>(correct) / static_cast<double>(2 * reals.size());
}

ArrayContainer to_container(const GanState& state) {
  ArrayContainer out;
  out.header = nlohmann::json{{"kind", "gan"}, {"config", detail::to_json(state.config)}}.dump();
  for (const auto& p : state.generator_parameters()) out.add(p.name, *p.value);
  for (const auto& p : state.discriminator_parameters()) out.add(p.name, *p.value);
  return out;
}

GanState gan_from_container(const ArrayContainer& container) {
  const auto header = nlohmann::json::parse(container.header, nullptr, false);
  require(!header.is_discarded() && header.value("kind", "") == "gan", ErrorKind::kMalformedFile,
          "container does not hold a GAN checkpoint");
  const GanConfig cfg = detail::gan_from_json(header.at("config"), GanConfig{}, "gan");
  GanState state = init_gan(cfg, 0);
  auto assign = [&](std::vector<nn::NamedTensor> params) {
    for (auto& p : params) {
      const Tensor& stored = container.at(p.name);
      require(stored.shape() == p.value->shape(), ErrorKind::kMalformedFile,
              "checkpoint array " + p.name + " has shape " + shape_string(stored.shape()));
      *p.value = stored;
    }
  };
  assign(state.generator_parameters());
  assign(state.discriminator_parameters());
  return state;
}

}  // namespace dshgan
