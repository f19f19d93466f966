#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>

#include "cifar_fixture.hpp"
#include "dshgan/datasets.hpp"
#include "dshgan/errors.hpp"
#include "pixel_classifier.hpp"

namespace dshgan {
namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kIo;
}

TEST(Cifar, TwoRecordFixture) {
  const Dataset ds = parse_cifar10(testing::cifar_fixture());
  ASSERT_EQ(ds.size(), 2u);
  EXPECT_EQ(ds.class_count, 10u);
  EXPECT_EQ(ds.label_mode, LabelMode::kSingle);
  EXPECT_EQ(ds.image_shape, (ImageShape{3, 32, 32}));
  EXPECT_EQ(ds.examples[0].label, LabelVector::one_hot(10, 3));
  EXPECT_EQ(ds.examples[1].label, LabelVector::one_hot(10, 7));
  EXPECT_EQ(ds.examples[0].pixels[0], -1.0);
  EXPECT_EQ(ds.examples[0].pixels[1], 1.0);
  EXPECT_EQ(ds.examples[1].pixels[0], 1.0);
  // byte b maps to b / 127.5 - 1
  EXPECT_DOUBLE_EQ(ds.examples[0].pixels[2], ((3 * 7 + 1) % 256) / 127.5 - 1.0);
  EXPECT_TRUE(ds.examples[0].is_labeled);
  EXPECT_EQ(ds.examples[1].id, 1u);
}

TEST(Cifar, EncodeIsTheInverse) {
  const std::string bytes = testing::cifar_fixture();
  EXPECT_EQ(encode_cifar10(parse_cifar10(bytes)), bytes);
}

TEST(Cifar, EmptyAndMalformed) {
  EXPECT_EQ(parse_cifar10("").size(), 0u);
  EXPECT_EQ(kind_of([] { parse_cifar10(std::string(3074, '\0')); }), ErrorKind::kMalformedFile);
  EXPECT_EQ(kind_of([] { parse_cifar10(testing::cifar_record(10, 0, 0, 0)); }), ErrorKind::kInvalidLabel);
}

TEST(Cifar, LoadsFilesAndDirectories) {
  const auto dir = std::filesystem::temp_directory_path() / "dshgan_cifar_test";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "data_batch_1.bin", std::ios::binary) << testing::cifar_fixture();
  std::ofstream(dir / "test_batch.bin", std::ios::binary) << testing::cifar_record(1, 9, 9, 3);
  EXPECT_EQ(load_cifar10(dir / "data_batch_1.bin").size(), 2u);
  const Dataset all = load_cifar10(dir);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all.examples[2].label, LabelVector::one_hot(10, 1));
  std::set<std::uint64_t> ids;
  for (const auto& ex : all.examples) ids.insert(ex.id);
  EXPECT_EQ(ids.size(), 3u);
  std::filesystem::remove_all(dir);
}

TEST(Toy, CountsAndDeterminism) {
  const Dataset a = make_toy_dataset(4, 500, 8, LabelMode::kSingle, 1);
  ASSERT_EQ(a.size(), 2000u);
  for (const auto& ex : a.examples) {
    EXPECT_EQ(ex.label.positive_count(), 1u);
    for (double p : ex.pixels) ASSERT_TRUE(p >= -1.0 && p <= 1.0);
  }
  EXPECT_EQ(a, make_toy_dataset(4, 500, 8, LabelMode::kSingle, 1));
  EXPECT_NE(a, make_toy_dataset(4, 500, 8, LabelMode::kSingle, 2));
  EXPECT_NO_THROW(validate(a));
}

TEST(Toy, MultiLabelCarriesOneToThreeLabels) {
  const Dataset ds = make_toy_dataset(5, 40, 8, LabelMode::kMulti, 3);
  std::set<std::size_t> counts;
  for (const auto& ex : ds.examples) counts.insert(ex.label.positive_count());
  EXPECT_EQ(*counts.begin(), 1u);
  EXPECT_LE(*counts.rbegin(), 3u);
  EXPECT_GT(counts.size(), 1u);
}

TEST(Toy, TooManyClasses) {
  EXPECT_EQ(kind_of([] { make_toy_dataset(kToyPatternCount + 1, 2, 8, LabelMode::kSingle, 1); }),
            ErrorKind::kUnsupportedConfiguration);
}

TEST(Toy, ClassesAreSeparable) {
  const Dataset ds = make_toy_dataset(4, 500, 8, LabelMode::kSingle, 1);
  const Split halves = split_queries(ds, 250, 4);
  const testing::PixelClassifier clf(halves.second);
  EXPECT_GE(clf.accuracy(halves.first), 0.90);
}

TEST(Split, HistogramOfTheLabeledSide) {
  const Dataset ds = make_toy_dataset(4, 500, 8, LabelMode::kSingle, 1);
  const Split s = split_supervised(ds, 50, 7);
  EXPECT_EQ(s.first.size(), 200u);
  EXPECT_EQ(s.second.size(), 1800u);
  std::map<std::size_t, std::size_t> hist;
  for (const auto& ex : s.first.examples) ++hist[ex.label.single_index()];
  EXPECT_EQ(hist, (std::map<std::size_t, std::size_t>{{0, 50}, {1, 50}, {2, 50}, {3, 50}}));
  std::set<std::uint64_t> ids;
  for (const auto& ex : s.first.examples) ids.insert(ex.id);
  for (const auto& ex : s.second.examples) {
    EXPECT_TRUE(ex.label.is_zero());
    EXPECT_FALSE(ex.is_labeled);
    EXPECT_EQ(ex.true_label.positive_count(), 1u);
    ids.insert(ex.id);
  }
  EXPECT_EQ(ids.size(), ds.size());
  EXPECT_EQ(s.first, split_supervised(ds, 50, 7).first);
}

TEST(Split, BoundaryAndInfeasible) {
  const Dataset ds = make_toy_dataset(3, 20, 8, LabelMode::kSingle, 1);
  const Split all = split_supervised(ds, 20, 1);
  EXPECT_EQ(all.first.size(), 60u);
  EXPECT_TRUE(all.second.empty());
  EXPECT_EQ(kind_of([&] { split_supervised(ds, 21, 1); }), ErrorKind::kInfeasibleSplit);
}

TEST(Split, QueriesKeepLabels) {
  const Dataset ds = make_toy_dataset(4, 30, 8, LabelMode::kSingle, 2);
  const Split s = split_queries(ds, 5, 3);
  EXPECT_EQ(s.first.size(), 20u);
  EXPECT_EQ(s.second.size(), 100u);
  for (const auto& ex : s.first.examples) EXPECT_TRUE(ex.is_labeled);
  for (const auto& ex : s.second.examples) EXPECT_TRUE(ex.is_labeled);
}

TEST(Container, DatasetRoundTripIsBitExact) {
  const Dataset ds = split_supervised(make_toy_dataset(3, 10, 8, LabelMode::kMulti, 5), 4, 2).second;
  const std::string bytes = encode_container(to_container(ds, 5));
  const Dataset back = from_container(decode_container(bytes));
  EXPECT_EQ(back, ds);
  EXPECT_EQ(encode_container(to_container(back, 5)), bytes);
}

TEST(Container, RejectsGarbage) {
  EXPECT_EQ(kind_of([] { decode_container("not a container"); }), ErrorKind::kMalformedFile);
}

}  // namespace
}  // namespace dshgan
