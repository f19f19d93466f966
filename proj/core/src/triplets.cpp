#include "dshgan/triplets.hpp"

#include <algorithm>
#include <map>

#include "dshgan/errors.hpp"
#include "dshgan/image_io.hpp"

namespace dshgan {
namespace {

struct PendingSynthesis {
  std::size_t triplet;
  bool positive;
};

LabelVector negative_label(const Dataset& labeled, const LabelVector& query,
                           std::mt19937_64& rng) {
  if (labeled.label_mode == LabelMode::kSingle) {
    const std::size_t c = labeled.class_count;
    require(c >= 2, ErrorKind::kInfeasibleSampling, "negatives need at least two classes");
    const std::size_t y = query.single_index();
    std::uniform_int_distribution<std::size_t> pick(0, c - 2);
    std::size_t j = pick(rng);
    if (j >= y) ++j;
    return LabelVector::one_hot(c, j);
  }
  // Multi-label: empirical label-set distribution, rejecting overlapping sets.
  std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);
  for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
    const LabelVector& candidate = labeled.examples[pick(rng)].label;
    if (!candidate.intersects(query)) return candidate;
  }
  fail(ErrorKind::kInfeasibleSampling,
       "no label set disjoint from the query after " + std::to_string(kMaxRejections) + " draws");
}

const ImageExample& real_negative(const Dataset& labeled, const LabelVector& query,
                                  std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, labeled.size() - 1);
  for (std::size_t attempt = 0; attempt < kMaxRejections; ++attempt) {
    const ImageExample& candidate = labeled.examples[pick(rng)];
    if (!candidate.label.intersects(query)) return candidate;
  }
  fail(ErrorKind::kInfeasibleSampling,
       "no real negative found after " + std::to_string(kMaxRejections) + " draws");
}

}  // namespace

std::vector<RealSyntheticTriplet> sample_triplets(const Dataset& labeled, const GanState& gan,
                                                  std::size_t count, double synthetic_fraction,
                                                  std::uint64_t seed) {
  require(!labeled.empty(), ErrorKind::kEmptyInput, "triplet sampling needs labeled images");
  require(synthetic_fraction >= 0.0 && synthetic_fraction <= 1.0, ErrorKind::kDomain,
          "synthetic_fraction must lie in [0, 1]");
  require(gan.config.class_count == labeled.class_count, ErrorKind::kShape,
          "GAN and dataset disagree on the class count");
  for (const ImageExample& ex : labeled.examples)
    require(ex.is_labeled && !ex.label.is_zero(), ErrorKind::kInvalidLabel,
            "triplet queries must be labeled");

  std::map<LabelVector, std::vector<std::size_t>> by_label;
  for (std::size_t i = 0; i < labeled.size(); ++i) by_label[labeled.examples[i].label].push_back(i);

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick_query(0, labeled.size() - 1);
  std::bernoulli_distribution synthetic(synthetic_fraction);

  std::vector<RealSyntheticTriplet> out(count);
  std::vector<PendingSynthesis> pending;
  std::vector<LabelVector> labels;
  std::vector<NoiseVector> noise;
  const std::size_t noise_dim = gan.config.generator.noise_dim;

  for (std::size_t t = 0; t < count; ++t) {
    RealSyntheticTriplet& triplet = out[t];
    const std::size_t qi = pick_query(rng);
    triplet.query = labeled.examples[qi];
    const LabelVector& qlabel = triplet.query.label;

    if (synthetic(rng)) {
      pending.push_back({t, true});
      labels.push_back(qlabel);
      noise.push_back(sample_noise(noise_dim, rng));
      triplet.positive_noise = noise.back();
    } else {
      const std::vector<std::size_t>& same = by_label.at(qlabel);
      std::size_t pi = qi;
      if (same.size() > 1) {
        std::uniform_int_distribution<std::size_t> pick(0, same.size() - 2);
        const std::size_t k = pick(rng);
        // Skip the query itself within its label bucket.
        const std::size_t self = static_cast<std::size_t>(
            std::find(same.begin(), same.end(), qi) - same.begin());
        pi = same[k >= self ? k + 1 : k];
      }
      triplet.positive = labeled.examples[pi];
    }

    if (synthetic(rng)) {
      pending.push_back({t, false});
      labels.push_back(negative_label(labeled, qlabel, rng));
      noise.push_back(sample_noise(noise_dim, rng));
      triplet.negative_noise = noise.back();
    } else {
      triplet.negative = real_negative(labeled, qlabel, rng);
    }
  }

  if (!pending.empty()) {
    const Tensor images = generate_batch(gan, labels, noise);
    const std::size_t n = gan.config.image_shape.pixel_count();
    for (std::size_t k = 0; k < pending.size(); ++k) {
      ImageExample ex;
      ex.pixels.assign(images.data() + k * n, images.data() + (k + 1) * n);
      ex.label = labels[k];
      ex.true_label = labels[k];
      ex.is_labeled = true;
      ex.source = Source::kSynthetic;
      RealSyntheticTriplet& triplet = out[pending[k].triplet];
      (pending[k].positive ? triplet.positive : triplet.negative) = std::move(ex);
    }
  }
  return out;
}

void check_triplet(const RealSyntheticTriplet& t) {
  require(t.query.source == Source::kReal, ErrorKind::kInvalidLabel, "triplet query is synthetic");
  require(t.positive.label == t.query.label, ErrorKind::kInvalidLabel,
          "positive label set differs from the query's");
  require(!t.negative.label.intersects(t.query.label), ErrorKind::kInvalidLabel,
          "negative shares a label with the query");
}

void dump_triplet_grid(std::span<const RealSyntheticTriplet> triplets, const ImageShape& shape,
                       const std::filesystem::path& path) {
  std::vector<std::vector<double>> images;
  for (const RealSyntheticTriplet& t : triplets) {
    images.push_back(t.query.pixels);
    images.push_back(t.positive.pixels);
    images.push_back(t.negative.pixels);
  }
  write_ppm_grid(path, images, shape, 3);
}

}  // namespace dshgan
