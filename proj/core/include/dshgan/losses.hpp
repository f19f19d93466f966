#pragma once

#include <span>
#include <vector>

#include "dshgan/datasets.hpp"

namespace dshgan {

double sigmoid(double x);
// log(1 + e^x) without overflow.
double softplus(double x);
std::vector<double> softmax(std::span<const double> scores);

// Log-likelihood loss for assigning the correct source:
// -log p for real images, -log(1 - p) for synthetic ones. p must lie in (0, 1).
double adversarial_loss(double p_source, Source source);

struct ScalarLoss {
  double value;
  double grad;  // d value / d logit
};
// Same loss expressed on the pre-sigmoid logit, with its derivative.
ScalarLoss adversarial_loss_from_logit(double logit, Source source);

// max(0, 1 - |h - hn|^2 + |h - hp|^2) on relaxed codes in [0,1]^K.
double triplet_ranking_loss(std::span<const double> h, std::span<const double> hp,
                            std::span<const double> hn);

struct TripletLossGrad {
  double value = 0.0;
  std::vector<double> d_query;
  std::vector<double> d_positive;
  std::vector<double> d_negative;
};
TripletLossGrad triplet_ranking_loss_grad(std::span<const double> h, std::span<const double> hp,
                                          std::span<const double> hn);

// Negative log softmax probability of the single true class.
double softmax_classification_loss(std::span<const double> scores, const LabelVector& label);
// Writes d loss / d scores into `grad` (same length as scores); returns the loss.
double softmax_classification_loss_grad(std::span<const double> scores, const LabelVector& label,
                                        std::span<double> grad);

// -sum_j [C_j log P_j + (1 - C_j) log(1 - P_j)], P_j in (0, 1).
double cross_entropy_classification_loss(std::span<const double> probs, const LabelVector& label);
// Per-label sigmoid cross-entropy evaluated on logits; gradient w.r.t. logits.
double cross_entropy_from_logits_grad(std::span<const double> logits, const LabelVector& label,
                                      std::span<double> grad);

// Class loss on head logits for either label mode (softmax or per-label sigmoid).
double classification_loss_from_logits(std::span<const double> logits, const LabelVector& label,
                                       LabelMode mode, std::span<double> grad);

}  // namespace dshgan
