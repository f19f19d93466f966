#pragma once

// Named-array container used for checkpoints and serialized datasets.
//
// Layout (all integers little-endian):
//   bytes 0..7   magic "DSHGARR1"
//   u32          header length H
//   H bytes      header text (JSON describing the producer's configuration)
//   u32          array count N
//   N times:
//     u32        name length L, then L bytes of name
//     u32        rank R, then R x u64 dimensions
//     f64 x prod(dimensions) values, IEEE-754 little-endian, row-major
//
// Encoding is a pure function of the contents, so write -> read -> write
// reproduces the file byte for byte.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dshgan/tensor.hpp"

namespace dshgan {

struct ArrayContainer {
  std::string header;
  std::vector<std::pair<std::string, Tensor>> arrays;

  void add(std::string name, Tensor value);
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const;

  bool operator==(const ArrayContainer&) const = default;
};

inline constexpr std::string_view kContainerMagic = "DSHGARR1";

std::string encode_container(const ArrayContainer& container);
ArrayContainer decode_container(std::string_view bytes);

void write_container(const ArrayContainer& container, const std::filesystem::path& path);
ArrayContainer read_container(const std::filesystem::path& path);

}  // namespace dshgan
