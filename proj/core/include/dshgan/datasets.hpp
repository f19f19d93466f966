#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dshgan/container.hpp"
#include "dshgan/tensor.hpp"

namespace dshgan {

enum class LabelMode { kSingle, kMulti };
enum class Source : std::uint8_t { kReal = 0, kSynthetic = 1 };

// Class-indicator vector; all zeros marks an unlabeled image.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::size_t class_count) : entries_(class_count, 0) {}
  explicit LabelVector(std::vector<std::uint8_t> entries);

  static LabelVector one_hot(std::size_t class_count, std::size_t index);
  static LabelVector from_indices(std::size_t class_count, std::span<const std::size_t> indices);

  std::size_t size() const noexcept { return entries_.size(); }
  bool operator[](std::size_t j) const { return entries_.at(j) != 0; }
  void set(std::size_t j, bool on) { entries_.at(j) = on ? 1 : 0; }

  std::size_t positive_count() const noexcept;
  bool is_zero() const noexcept { return positive_count() == 0; }
  bool intersects(const LabelVector& other) const;
  // Index of the single positive entry; invalid-label error otherwise.
  std::size_t single_index() const;
  std::vector<std::size_t> indices() const;
  std::span<const std::uint8_t> entries() const noexcept { return entries_; }

  bool operator==(const LabelVector&) const = default;
  auto operator<=>(const LabelVector&) const = default;

 private:
  std::vector<std::uint8_t> entries_;
};

struct ImageShape {
  std::size_t channels = 3;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t pixel_count() const noexcept { return channels * height * width; }
  bool operator==(const ImageShape&) const = default;
};

struct ImageExample {
  // Channel-planar (C, H, W), values in [-1, 1].
  std::vector<double> pixels;
  LabelVector label;
  // Ground truth kept for evaluation only; training code reads `label`.
  LabelVector true_label;
  bool is_labeled = false;
  Source source = Source::kReal;
  std::uint64_t id = 0;

  bool operator==(const ImageExample&) const = default;
};

struct Dataset {
  std::vector<ImageExample> examples;
  std::size_t class_count = 0;
  LabelMode label_mode = LabelMode::kSingle;
  ImageShape image_shape;

  std::size_t size() const noexcept { return examples.size(); }
  bool empty() const noexcept { return examples.empty(); }
  bool operator==(const Dataset&) const = default;
};

// Checks the label/pixel invariants of every example; throws on violation.
void validate(const Dataset& ds);

// --- CIFAR-10 binary batches: 1 label byte + 3072 channel-planar pixel bytes.
inline constexpr std::size_t kCifarRecordBytes = 3073;
inline constexpr std::size_t kCifarClasses = 10;

// `path` is either one batch file or a directory holding data_batch_*.bin /
// test_batch.bin (all *.bin files in name order when the standard names are
// absent).
Dataset load_cifar10(const std::filesystem::path& path);
Dataset parse_cifar10(std::string_view bytes, std::uint64_t first_id = 0);
// Inverse of the loader's [0,255] -> [-1,1] mapping, for fixtures and export.
std::string encode_cifar10(const Dataset& ds);

// --- Procedural toy data.
inline constexpr std::size_t kToyPatternCount = 10;

Dataset make_toy_dataset(std::size_t class_count, std::size_t per_class, std::size_t image_size,
                         LabelMode label_mode, std::uint64_t seed);

struct Split {
  Dataset first;
  Dataset second;
};

// Picks `labeled_per_class` labeled examples per class; the remainder keeps its
// ground truth hidden in `true_label` but has `label` zeroed.
Split split_supervised(const Dataset& ds, std::size_t labeled_per_class, std::uint64_t seed);

// Holds out `per_class` examples per class as a query set; labels stay intact
// on both sides.
Split split_queries(const Dataset& ds, std::size_t per_class, std::uint64_t seed);

Dataset merge(const Dataset& a, const Dataset& b);

// Batched pixel tensor [N, C, H, W] for the given examples.
Tensor to_batch(const Dataset& ds, std::span<const std::size_t> rows);
Tensor to_batch(std::span<const ImageExample* const> examples, const ImageShape& shape);

// Serialization through the named-array container; header records
// class_count, label_mode, image shape and the generating seed if known.
ArrayContainer to_container(const Dataset& ds, std::optional<std::uint64_t> seed = std::nullopt);
Dataset from_container(const ArrayContainer& container);

}  // namespace dshgan
