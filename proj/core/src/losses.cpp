#include "dshgan/losses.hpp"

#include <algorithm>
#include <cmath>

#include "dshgan/errors.hpp"

namespace dshgan {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

std::vector<double> softmax(std::span<const double> scores) {
  require(!scores.empty(), ErrorKind::kEmptyInput, "softmax of zero scores");
  const double peak = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double total = 0.0;
  for (std::size_t j = 0; j < scores.size(); ++j) total += p[j] = std::exp(scores[j] - peak);
  for (double& v : p) v /= total;
  return p;
}

double adversarial_loss(double p_source, Source source) {
  require(p_source > 0.0 && p_source < 1.0, ErrorKind::kDomain,
          "source probability must lie strictly inside (0, 1)");
  return source == Source::kReal ? -std::log(p_source) : -std::log1p(-p_source);
}

ScalarLoss adversarial_loss_from_logit(double logit, Source source) {
  // -log sigmoid(a) = softplus(-a); -log(1 - sigmoid(a)) = softplus(a).
  if (source == Source::kReal) return {softplus(-logit), sigmoid(logit) - 1.0};
  return {softplus(logit), sigmoid(logit)};
}

namespace {

void check_lengths(std::span<const double> h, std::span<const double> hp,
                   std::span<const double> hn) {
  require(h.size() == hp.size() && h.size() == hn.size(), ErrorKind::kShape,
          "triplet codes have different lengths");
}

}  // namespace

double triplet_ranking_loss(std::span<const double> h, std::span<const double> hp,
                            std::span<const double> hn) {
  check_lengths(h, hp, hn);
  double neg = 0.0, pos = 0.0;
  for (std::size_t i = 0; i < h.size(); ++i) {
    neg += (h[i] - hn[i]) * (h[i] - hn[i]);
    pos += (h[i] - hp[i]) * (h[i] - hp[i]);
  }
  return std::max(0.0, 1.0 - neg + pos);
}

TripletLossGrad triplet_ranking_loss_grad(std::span<const double> h, std::span<const double> hp,
                                          std::span<const double> hn) {
  TripletLossGrad out;
  out.value = triplet_ranking_loss(h, hp, hn);
  const std::size_t k = h.size();
  out.d_query.assign(k, 0.0);
  out.d_positive.assign(k, 0.0);
  out.d_negative.assign(k, 0.0);
  if (out.value <= 0.0) return out;
  for (std::size_t i = 0; i < k; ++i) {
    // d/dh [-(h-hn)^2 + (h-hp)^2] = -2(h-hn) + 2(h-hp) = 2(hn - hp)
    out.d_query[i] = 2.0 * (hn[i] - hp[i]);
    out.d_positive[i] = -2.0 * (h[i] - hp[i]);
    out.d_negative[i] = 2.0 * (h[i] - hn[i]);
  }
  return out;
}

double softmax_classification_loss(std::span<const double> scores, const LabelVector& label) {
  std::vector<double> grad(scores.size());
  return softmax_classification_loss_grad(scores, label, grad);
}

double softmax_classification_loss_grad(std::span<const double> scores, const LabelVector& label,
                                        std::span<double> grad) {
  require(label.size() == scores.size(), ErrorKind::kShape, "score/label length mismatch");
  const std::size_t y = label.single_index();
  const double peak = *std::max_element(scores.begin(), scores.end());
  double total = 0.0;
  for (double s : scores) total += std::exp(s - peak);
  const double log_z = peak + std::log(total);
  for (std::size_t j = 0; j < scores.size(); ++j)
    grad[j] = std::exp(scores[j] - log_z) - (j == y ? 1.0 : 0.0);
  return log_z - scores[y];
}

double cross_entropy_classification_loss(std::span<const double> probs, const LabelVector& label) {
  require(label.size() == probs.size(), ErrorKind::kShape, "probability/label length mismatch");
  double loss = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    require(probs[j] > 0.0 && probs[j] < 1.0, ErrorKind::kDomain,
            "label probability must lie strictly inside (0, 1)");
    loss -= label[j] ? std::log(probs[j]) : std::log1p(-probs[j]);
  }
  return loss;
}

double cross_entropy_from_logits_grad(std::span<const double> logits, const LabelVector& label,
                                      std::span<double> grad) {
  require(label.size() == logits.size(), ErrorKind::kShape, "logit/label length mismatch");
  double loss = 0.0;
  for (std::size_t j = 0; j < logits.size(); ++j) {
    const double a = logits[j];
    const bool on = label[j];
    loss += on ? softplus(-a) : softplus(a);
    grad[j] = sigmoid(a) - (on ? 1.0 : 0.0);
  }
  return loss;
}

double classification_loss_from_logits(std::span<const double> logits, const LabelVector& label,
                                       LabelMode mode, std::span<double> grad) {
  return mode == LabelMode::kSingle ? softmax_classification_loss_grad(logits, label, grad)
                                    : cross_entropy_from_logits_grad(logits, label, grad);
}

}  // namespace dshgan
