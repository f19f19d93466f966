#include <gtest/gtest.h>

#include "dshgan/errors.hpp"
#include "dshgan/triplets.hpp"
#include "micro.hpp"

namespace dshgan {
namespace {

TEST(Triplets, FullySyntheticConstruction) {
  const testing::MicroSetup s = testing::make_micro(2, LabelMode::kSingle, 1.0, 200);
  for (const auto& t : s.triplets) {
    EXPECT_EQ(t.query.source, Source::kReal);
    EXPECT_EQ(t.positive.source, Source::kSynthetic);
    EXPECT_EQ(t.negative.source, Source::kSynthetic);
    EXPECT_EQ(t.positive.label, t.query.label);
    EXPECT_NE(t.negative.label.single_index(), t.query.label.single_index());
    // Batched synthesis may round differently from a single image.
    const auto pos = generate(s.gan, t.positive.label, t.positive_noise).pixels;
    const auto neg = generate(s.gan, t.negative.label, t.negative_noise).pixels;
    for (std::size_t i = 0; i < pos.size(); ++i) {
      ASSERT_NEAR(t.positive.pixels[i], pos[i], 1e-12);
      ASSERT_NEAR(t.negative.pixels[i], neg[i], 1e-12);
    }
  }
}

TEST(Triplets, NoSyntheticMembersAtFractionZero) {
  for (const LabelMode mode : {LabelMode::kSingle, LabelMode::kMulti}) {
    const testing::MicroSetup s = testing::make_micro(4, mode, 0.0, 300);
    for (const auto& t : s.triplets) {
      EXPECT_EQ(t.positive.source, Source::kReal);
      EXPECT_EQ(t.negative.source, Source::kReal);
      EXPECT_TRUE(t.positive_noise.empty());
      EXPECT_TRUE(t.negative_noise.empty());
    }
  }
}

TEST(Triplets, SyntheticShareFollowsTheFraction) {
  const testing::MicroSetup s = testing::make_micro(5, LabelMode::kSingle, 0.5, 0);
  const auto triplets = sample_triplets(s.labeled, s.gan, 10000, 0.5, 12);
  std::size_t synthetic = 0;
  for (const auto& t : triplets) synthetic += t.positive.source == Source::kSynthetic ? 1 : 0;
  const double share = static_cast<double>(synthetic) / 10000.0;
  EXPECT_GE(share, 0.47);
  EXPECT_LE(share, 0.53);
}

TEST(Triplets, LabelInvariantsHoldExhaustively) {
  for (const LabelMode mode : {LabelMode::kSingle, LabelMode::kMulti})
    for (const double f : {0.0, 0.3, 1.0}) {
      const testing::MicroSetup s = testing::make_micro(6, mode, f, 500);
      for (const auto& t : s.triplets) {
        EXPECT_EQ(t.positive.label, t.query.label);
        EXPECT_FALSE(t.negative.label.intersects(t.query.label));
        EXPECT_NO_THROW(check_triplet(t));
      }
    }
}

TEST(Triplets, SameSeedSameStream) {
  const testing::MicroSetup s = testing::make_micro(8, LabelMode::kMulti, 0.5, 0);
  const auto a = sample_triplets(s.labeled, s.gan, 50, 0.5, 3);
  const auto b = sample_triplets(s.labeled, s.gan, 50, 0.5, 3);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].query, b[i].query);
    EXPECT_EQ(a[i].positive, b[i].positive);
    EXPECT_EQ(a[i].negative, b[i].negative);
    EXPECT_EQ(a[i].positive_noise, b[i].positive_noise);
    EXPECT_EQ(a[i].negative_noise, b[i].negative_noise);
  }
}

TEST(Triplets, CheckRejectsOverlappingNegative) {
  testing::MicroSetup s = testing::make_micro(9, LabelMode::kSingle, 0.0, 1);
  auto t = s.triplets[0];
  t.negative.label = t.query.label;
  try {
    check_triplet(t);
    FAIL() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidLabel);
  }
}

TEST(Triplets, NoDisjointLabelSetIsInfeasible) {
  testing::MicroSetup s = testing::make_micro(9, LabelMode::kMulti, 0.0, 1);
  for (auto& ex : s.labeled.examples) {
    const std::size_t all[] = {0, 1, 2, 3};
    ex.label = LabelVector::from_indices(4, all);
    ex.true_label = ex.label;
  }
  try {
    sample_triplets(s.labeled, s.gan, 5, 0.0, 1);
    FAIL() << "no error raised";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInfeasibleSampling);
  }
}

}  // namespace
}  // namespace dshgan
