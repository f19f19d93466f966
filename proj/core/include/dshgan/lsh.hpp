#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dshgan/container.hpp"
#include "dshgan/datasets.hpp"
#include "dshgan/retrieval.hpp"
#include "dshgan/tensor.hpp"

namespace dshgan {

inline constexpr const char* kRawPixelFeatures = "raw_pixels";

struct LshModel {
  Tensor projection;  // [K, d], standard normal
  std::vector<double> thresholds;  // per-bit median of the projected training features
  std::string feature_extractor = kRawPixelFeatures;

  std::size_t code_length() const noexcept { return thresholds.size(); }
  std::size_t feature_dim() const noexcept { return projection.rank() == 2 ? projection.dim(1) : 0; }

  bool operator==(const LshModel&) const = default;
};

LshModel fit_lsh(std::span<const std::vector<double>> features, std::size_t code_length,
                 std::uint64_t seed);

// bit_i = 1 iff projection_i . feature > threshold_i
HashCode lsh_encode(const LshModel& model, std::span<const double> feature);

std::vector<std::vector<double>> pixel_features(const Dataset& ds);

RetrievalIndex build_lsh_index(const Dataset& db, const LshModel& model);
std::vector<HashCode> lsh_encode_dataset(const Dataset& ds, const LshModel& model);

ArrayContainer to_container(const LshModel& model);
LshModel lsh_from_container(const ArrayContainer& container);

}  // namespace dshgan
