#include "dshgan/hashmodel.hpp"

#include <array>

#include "dshgan/errors.hpp"
#include "dshgan/losses.hpp"
#include "json_config.hpp"

namespace dshgan {
namespace {

template <class Named>
void append(std::vector<Named>& out, std::vector<Named> more) {
  out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
}

Tensor single_image(const HashModelState& state, const ImageExample& x) {
  const ImageShape& s = state.config.image_shape;
  require(x.pixels.size() == s.pixel_count(), ErrorKind::kShape,
          "image has " + std::to_string(x.pixels.size()) + " values, expected " +
              std::to_string(s.pixel_count()));
  return Tensor({1, s.channels, s.height, s.width}, x.pixels);
}

void check_images(const HashModelState& state, const Tensor& images) {
  const ImageShape& s = state.config.image_shape;
  require(images.rank() == 4 && images.dim(1) == s.channels && images.dim(2) == s.height &&
              images.dim(3) == s.width,
          ErrorKind::kShape, "hash model input has shape " + shape_string(images.shape()));
}

void add_into(Tensor& dst, const Tensor& src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

bool copy_if_compatible(nn::Sequential& dst, const nn::Sequential& src) {
  auto d = dst.parameters("");
  const auto s = src.parameters("");
  if (d.size() != s.size()) return false;
  for (std::size_t i = 0; i < d.size(); ++i)
    if (d[i].name != s[i].name || d[i].value->shape() != s[i].value->shape()) return false;
  for (std::size_t i = 0; i < d.size(); ++i) *d[i].value = *s[i].value;
  return true;
}

}  // namespace

std::vector<nn::NamedTensor> HashModelState::parameters() {
  auto out = encoder.parameters("encoder.");
  append(out, hash_head.parameters("hash_head."));
  append(out, adversary_head.parameters("adversary_head."));
  append(out, class_head.parameters("class_head."));
  return out;
}

std::vector<nn::ConstNamedTensor> HashModelState::parameters() const {
  auto out = encoder.parameters("encoder.");
  append(out, hash_head.parameters("hash_head."));
  append(out, adversary_head.parameters("adversary_head."));
  append(out, class_head.parameters("class_head."));
  return out;
}

HashModelState init_hash_model(const HashModelConfig& cfg, std::uint64_t seed) {
  require(cfg.code_length >= 1, ErrorKind::kConfiguration, "code length must be >= 1");
  require(cfg.class_count >= 1, ErrorKind::kConfiguration, "class count must be >= 1");
  std::mt19937_64 rng(seed);
  HashModelState s;
  s.config = cfg;
  s.encoder = make_trunk(cfg.image_shape, cfg.trunk, rng);
  s.hash_head = make_head(cfg.trunk.feature_width, cfg.code_length, cfg.trunk.init_std, rng);
  s.hash_head.add(nn::Sigmoid{});
  s.adversary_head = make_head(cfg.trunk.feature_width, 1, cfg.trunk.init_std, rng);
  s.class_head = make_head(cfg.trunk.feature_width, cfg.class_count, cfg.trunk.init_std, rng);
  return s;
}

TransferReport transfer_from_discriminator(HashModelState& model, const GanState& gan,
                                           const DiscriminatorTransfer& what) {
  TransferReport report;
  const bool same_input = model.config.image_shape == gan.config.image_shape;
  if (what.encoder && same_input) report.encoder = copy_if_compatible(model.encoder, gan.trunk);
  if (what.adversary_head)
    report.adversary_head = copy_if_compatible(model.adversary_head, gan.source_head);
  if (what.class_head && model.config.label_mode == gan.config.label_mode)
    report.class_head = copy_if_compatible(model.class_head, gan.class_head);
  return report;
}

std::vector<double> embed(const HashModelState& state, const ImageExample& x) {
  return state.encoder.forward(single_image(state, x)).storage();
}

RelaxedCode hash_forward(const HashModelState& state, const ImageExample& x) {
  return hash_forward_batch(state, single_image(state, x)).storage();
}

Tensor hash_forward_batch(const HashModelState& state, const Tensor& images) {
  check_images(state, images);
  return state.hash_head.forward(state.encoder.forward(images));
}

double cnn_objective(std::span<const StreamLosses> losses, const StreamWeights& w) {
  require(!losses.empty(), ErrorKind::kEmptyInput, "objective over an empty batch");
  double total = 0.0;
  for (const StreamLosses& l : losses)
    total += w.triplet * l.triplet + w.adversary * l.adversary + w.classification * l.classification;
  return total / static_cast<double>(losses.size());
}

double generator_objective(std::span<const StreamLosses> losses, const StreamWeights& w) {
  require(!losses.empty(), ErrorKind::kEmptyInput, "objective over an empty batch");
  double total = 0.0;
  for (const StreamLosses& l : losses)
    total += w.triplet * l.triplet - w.adversary * l.adversary + w.classification * l.classification;
  return total / static_cast<double>(losses.size());
}

TripletBatch make_triplet_batch(std::span<const RealSyntheticTriplet> triplets,
                                const ImageShape& shape) {
  require(!triplets.empty(), ErrorKind::kEmptyInput, "empty triplet batch");
  TripletBatch b;
  std::vector<const ImageExample*> q, p, n;
  for (const RealSyntheticTriplet& t : triplets) {
    q.push_back(&t.query);
    p.push_back(&t.positive);
    n.push_back(&t.negative);
    b.query_labels.push_back(t.query.label);
    b.positive_labels.push_back(t.positive.label);
    b.negative_labels.push_back(t.negative.label);
    b.positive_sources.push_back(t.positive.source);
    b.negative_sources.push_back(t.negative.source);
  }
  b.queries = to_batch(q, shape);
  b.positives = to_batch(p, shape);
  b.negatives = to_batch(n, shape);
  return b;
}

BatchEvaluation evaluate_triplet_batch(const HashModelState& state, const TripletBatch& batch,
                                       Objective objective, const StreamWeights& weights,
                                       bool want_param_grads, bool want_input_grads) {
  const std::size_t b = batch.size();
  require(b > 0, ErrorKind::kEmptyInput, "empty triplet batch");
  require(batch.positive_labels.size() == b && batch.negative_labels.size() == b &&
              batch.positive_sources.size() == b && batch.negative_sources.size() == b,
          ErrorKind::kShape, "triplet batch fields disagree in length");
  const HashModelConfig& cfg = state.config;
  const std::size_t k = cfg.code_length, c = cfg.class_count;

  const std::array<Tensor, 3> parts{batch.queries, batch.positives, batch.negatives};
  const Tensor images = concat_rows(parts);
  check_images(state, images);
  require(images.dim(0) == 3 * b, ErrorKind::kShape, "triplet batch image count mismatch");

  nn::Sequential::Trace enc_trace, hash_trace, adv_trace, cls_trace;
  const Tensor features = state.encoder.forward(images, enc_trace);
  const Tensor codes = state.hash_head.forward(features, hash_trace);
  const Tensor adv = state.adversary_head.forward(features, adv_trace);
  const Tensor cls = state.class_head.forward(features, cls_trace);

  const double sign = objective == Objective::kCnn ? 1.0 : -1.0;
  const double inv_b = 1.0 / static_cast<double>(b);
  constexpr double kThird = 1.0 / 3.0;

  Tensor d_codes({3 * b, k}), d_adv({3 * b, 1}), d_cls({3 * b, c});
  std::vector<double> row_grad(c);
  BatchEvaluation out;
  out.losses.resize(b);

  for (std::size_t i = 0; i < b; ++i) {
    const std::array<std::size_t, 3> rows{i, b + i, 2 * b + i};
    const std::array<const LabelVector*, 3> labels{&batch.query_labels[i],
                                                   &batch.positive_labels[i],
                                                   &batch.negative_labels[i]};
    const std::array<Source, 3> sources{Source::kReal, batch.positive_sources[i],
                                        batch.negative_sources[i]};
    StreamLosses& l = out.losses[i];

    auto code = [&](std::size_t row) { return std::span<const double>(codes.data() + row * k, k); };
    const TripletLossGrad tl = triplet_ranking_loss_grad(code(rows[0]), code(rows[1]), code(rows[2]));
    l.triplet = tl.value;
    for (std::size_t j = 0; j < k; ++j) {
      const double scale = weights.triplet * inv_b;
      d_codes[rows[0] * k + j] = scale * tl.d_query[j];
      d_codes[rows[1] * k + j] = scale * tl.d_positive[j];
      d_codes[rows[2] * k + j] = scale * tl.d_negative[j];
    }

    for (std::size_t m = 0; m < 3; ++m) {
      const std::size_t r = rows[m];
      const ScalarLoss la = adversarial_loss_from_logit(adv[r], sources[m]);
      l.adversary += kThird * la.value;
      d_adv[r] = sign * weights.adversary * kThird * la.grad * inv_b;

      const std::span<const double> logits(cls.data() + r * c, c);
      const double lc = classification_loss_from_logits(logits, *labels[m], cfg.label_mode, row_grad);
      l.classification += kThird * lc;
      for (std::size_t j = 0; j < c; ++j)
        d_cls[r * c + j] = weights.classification * kThird * row_grad[j] * inv_b;
    }
  }
  out.objective = objective == Objective::kCnn ? cnn_objective(out.losses, weights)
                                               : generator_objective(out.losses, weights);
  if (!want_param_grads && !want_input_grads) return out;

  std::vector<Tensor> grads;
  const std::size_t ne = state.encoder.parameter_tensor_count();
  const std::size_t nh = state.hash_head.parameter_tensor_count();
  const std::size_t na = state.adversary_head.parameter_tensor_count();
  const std::size_t nc = state.class_head.parameter_tensor_count();
  std::span<Tensor> all;
  if (want_param_grads) {
    for (const auto& p : state.parameters()) grads.emplace_back(p.value->shape());
    all = grads;
  }
  auto part = [&](std::size_t offset, std::size_t count) {
    return all.empty() ? std::span<Tensor>() : all.subspan(offset, count);
  };
  Tensor d_features = state.hash_head.backward(hash_trace, d_codes, part(ne, nh));
  add_into(d_features, state.adversary_head.backward(adv_trace, d_adv, part(ne + nh, na)));
  add_into(d_features, state.class_head.backward(cls_trace, d_cls, part(ne + nh + na, nc)));
  const Tensor d_images = state.encoder.backward(enc_trace, d_features, part(0, ne), want_input_grads);
  out.param_grads = std::move(grads);
  if (want_input_grads) {
    out.d_queries = d_images.slice_rows(0, b);
    out.d_positives = d_images.slice_rows(b, b);
    out.d_negatives = d_images.slice_rows(2 * b, b);
  }
  return out;
}

StreamLosses triplet_stream_losses(const HashModelState& state, const RealSyntheticTriplet& t) {
  const TripletBatch batch = make_triplet_batch(std::span(&t, 1), state.config.image_shape);
  return evaluate_triplet_batch(state, batch, Objective::kCnn, {}, false, false).losses[0];
}

ArrayContainer to_container(const HashModelState& state) {
  ArrayContainer out;
  out.header =
      nlohmann::json{{"kind", "hash_model"}, {"config", detail::to_json(state.config)}}.dump();
  for (const auto& p : state.parameters()) out.add(p.name, *p.value);
  return out;
}

HashModelState hash_model_from_container(const ArrayContainer& container) {
  const auto header = nlohmann::json::parse(container.header, nullptr, false);
  require(!header.is_discarded() && header.value("kind", "") == "hash_model",
          ErrorKind::kMalformedFile, "container does not hold a hash model checkpoint");
  HashModelState state =
      init_hash_model(detail::hash_model_from_json(header.at("config"), {}, "model"), 0);
  for (auto& p : state.parameters()) {
    const Tensor& stored = container.at(p.name);
    require(stored.shape() == p.value->shape(), ErrorKind::kMalformedFile,
            "checkpoint array " + p.name + " has shape " + shape_string(stored.shape()));
    *p.value = stored;
  }
  return state;
}

}  // namespace dshgan
