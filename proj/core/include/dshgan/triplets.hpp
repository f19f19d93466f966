#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "dshgan/datasets.hpp"
#include "dshgan/gan.hpp"

namespace dshgan {

// (real query, same-label positive, disjoint-label negative). Synthetic
// members keep the noise vector they were generated from so the generator can
// be re-run with gradients; real members leave it empty.
struct RealSyntheticTriplet {
  ImageExample query;
  ImageExample positive;
  ImageExample negative;
  NoiseVector positive_noise;
  NoiseVector negative_noise;
};

inline constexpr std::size_t kMaxRejections = 100;

// Samples `count` triplets with queries drawn uniformly from `labeled`. Each
// positive and negative is, independently, synthesized by `gan` with
// probability `synthetic_fraction` and otherwise drawn from the labeled reals.
std::vector<RealSyntheticTriplet> sample_triplets(const Dataset& labeled, const GanState& gan,
                                                  std::size_t count, double synthetic_fraction,
                                                  std::uint64_t seed);

// Desk-scale default for |T| per epoch: ten triplets per labeled image.
inline std::size_t default_triplet_count(const Dataset& labeled) { return 10 * labeled.size(); }

// Throws invalid-label if the label-set invariants of a triplet do not hold.
void check_triplet(const RealSyntheticTriplet& t);

// Writes one row per triplet (query | positive | negative) as a binary PPM.
void dump_triplet_grid(std::span<const RealSyntheticTriplet> triplets, const ImageShape& shape,
                       const std::filesystem::path& path);

}  // namespace dshgan
