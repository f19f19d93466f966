#include <gtest/gtest.h>

#include <random>

#include "dshgan/errors.hpp"
#include "dshgan/lsh.hpp"

namespace dshgan {
namespace {

std::vector<std::vector<double>> gaussian_points(std::size_t n, std::size_t d, std::uint64_t seed, double shift = 0.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(shift, 1.0);
  std::vector<std::vector<double>> out(n, std::vector<double>(d));
  for (auto& p : out)
    for (double& v : p) v = normal(rng);
  return out;
}

TEST(Lsh, SameSeedSameModel) {
  const auto pts = gaussian_points(50, 6, 1);
  EXPECT_EQ(fit_lsh(pts, 8, 3), fit_lsh(pts, 8, 3));
  EXPECT_NE(fit_lsh(pts, 8, 3), fit_lsh(pts, 8, 4));
}

TEST(Lsh, SymmetricFeaturesGiveZeroThreshold) {
  const std::vector<std::vector<double>> pts{{-2.0}, {-0.5}, {0.5}, {2.0}};
  EXPECT_EQ(fit_lsh(pts, 1, 9).thresholds[0], 0.0);
}

TEST(Lsh, MedianThresholdsBalanceBits) {
  // Un-centered features: zero thresholds would give badly skewed bits.
  const auto pts = gaussian_points(1000, 16, 2, 0.7);
  const LshModel m = fit_lsh(pts, 24, 5);
  std::vector<std::size_t> ones(24, 0);
  for (const auto& p : pts) {
    const HashCode c = lsh_encode(m, p);
    for (std::size_t i = 0; i < 24; ++i) ones[i] += c.bit(i) ? 1 : 0;
  }
  for (std::size_t n : ones) {
    EXPECT_GE(n, 400u);
    EXPECT_LE(n, 600u);
  }
}

TEST(Lsh, FeatureOnEveryThresholdEncodesToZero) {
  // One-dimensional features: projection_i * x = threshold_i for the median point.
  const std::vector<std::vector<double>> pts{{1.0}, {3.0}, {5.0}};
  const LshModel m = fit_lsh(pts, 6, 2);
  EXPECT_EQ(lsh_encode(m, pts[1]), HashCode(6));
}

TEST(Lsh, PositiveScalingKeepsBitsAtZeroThreshold) {
  const auto pts = gaussian_points(40, 5, 4);
  LshModel m = fit_lsh(pts, 16, 1);
  std::fill(m.thresholds.begin(), m.thresholds.end(), 0.0);
  for (const auto& p : pts) {
    std::vector<double> scaled = p;
    for (double& v : scaled) v *= 2.0;
    EXPECT_EQ(lsh_encode(m, p), lsh_encode(m, scaled));
  }
}

TEST(Lsh, BitsEqualDotProductOracle) {
  const auto pts = gaussian_points(30, 7, 6);
  const LshModel m = fit_lsh(pts, 12, 8);
  ASSERT_EQ(m.projection.shape(), (Shape{12, 7}));
  for (const auto& p : pts) {
    const HashCode c = lsh_encode(m, p);
    for (std::size_t i = 0; i < 12; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < 7; ++j) dot += m.projection[i * 7 + j] * p[j];
      EXPECT_EQ(c.bit(i), dot > m.thresholds[i]);
    }
  }
}

TEST(Lsh, Errors) {
  try {
    fit_lsh({}, 4, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEmptyInput);
  }
  const LshModel m = fit_lsh(gaussian_points(5, 3, 1), 4, 1);
  try {
    lsh_encode(m, std::vector<double>(4));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kShape);
  }
}

TEST(Lsh, ContainerRoundTrip) {
  const LshModel m = fit_lsh(gaussian_points(20, 3, 1), 5, 2);
  EXPECT_EQ(lsh_from_container(decode_container(encode_container(to_container(m)))), m);
}

TEST(Lsh, PixelIndexOverDataset) {
  const Dataset ds = make_toy_dataset(3, 10, 8, LabelMode::kSingle, 1);
  const LshModel m = fit_lsh(pixel_features(ds), 12, 3);
  EXPECT_EQ(m.feature_dim(), 192u);
  const RetrievalIndex index = build_lsh_index(ds, m);
  ASSERT_EQ(index.size(), ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) EXPECT_EQ(index.entries()[i].code, lsh_encode(m, ds.examples[i].pixels));
}

}  // namespace
}  // namespace dshgan
