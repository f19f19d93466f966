#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "dshgan/datasets.hpp"
#include "dshgan/hashmodel.hpp"

namespace dshgan {

// K-bit binary code packed 64 bits per word; bit i lives in word i / 64 at
// position i % 64. Padding bits above K are always zero.
class HashCode {
 public:
  HashCode() = default;
  explicit HashCode(std::size_t bits);
  static HashCode from_words(std::size_t bits, std::vector<std::uint64_t> words);
  static HashCode from_bits(std::span<const std::uint8_t> bits);

  std::size_t size() const noexcept { return bits_; }
  bool bit(std::size_t i) const;
  void set(std::size_t i, bool on);
  std::span<const std::uint64_t> words() const noexcept { return words_; }
  HashCode complement() const;

  bool operator==(const HashCode&) const = default;

 private:
  std::size_t bits_ = 0;
  std::vector<std::uint64_t> words_;
};

std::size_t words_for_bits(std::size_t bits);

// bit_i = 1 iff h_i > 0.5; entries must lie in [0, 1].
HashCode quantize(std::span<const double> relaxed);

std::size_t hamming_distance(const HashCode& a, const HashCode& b);

struct IndexEntry {
  std::uint64_t id = 0;
  HashCode code;
  LabelVector label;

  bool operator==(const IndexEntry&) const = default;
};

class RetrievalIndex {
 public:
  RetrievalIndex() = default;
  explicit RetrievalIndex(std::size_t code_length) : code_length_(code_length) {}

  void add(std::uint64_t id, HashCode code, LabelVector label);

  std::size_t code_length() const noexcept { return code_length_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::vector<IndexEntry>& entries() const noexcept { return entries_; }

  bool operator==(const RetrievalIndex&) const = default;

 private:
  std::size_t code_length_ = 0;
  std::vector<IndexEntry> entries_;
  std::unordered_set<std::uint64_t> ids_;
};

// Ground truth for evaluation: the visible label, or the hidden one for
// unlabeled pool images.
const LabelVector& evaluation_label(const ImageExample& ex);

// quantize(hash_forward(x)) for every database image, in database order.
RetrievalIndex build_index(const Dataset& db, const HashModelState& model);
std::vector<HashCode> encode_dataset(const Dataset& ds, const HashModelState& model);

struct SearchHit {
  std::uint64_t id = 0;
  std::size_t distance = 0;

  bool operator==(const SearchHit&) const = default;
};

// Full ranking by ascending Hamming distance, ties by ascending id.
std::vector<SearchHit> search(const RetrievalIndex& index, const HashCode& query);

// Ids whose code lies within Hamming distance r of the query, ascending.
std::vector<std::uint64_t> lookup_within_radius(const RetrievalIndex& index, const HashCode& query,
                                                std::size_t radius);

// Code export file (all integers little-endian):
//   bytes 0..7   magic "DSHCODE1"
//   u32          K (bits per code)
//   u32          c (label vector length)
//   u64          N (entry count)
//   N * ceil(K/64) u64 code words, entry-major
//   N u64        ids
//   N * c u8     label indicators (0 or 1)
inline constexpr std::string_view kCodeFileMagic = "DSHCODE1";

std::string encode_code_file(const RetrievalIndex& index, std::size_t class_count);
RetrievalIndex decode_code_file(std::string_view bytes);
void write_code_file(const RetrievalIndex& index, std::size_t class_count,
                     const std::filesystem::path& path);
RetrievalIndex read_code_file(const std::filesystem::path& path);

}  // namespace dshgan
