#include "dshgan/container.hpp"

#include <fstream>
#include <iterator>

#include "binary_io.hpp"
#include "dshgan/errors.hpp"

namespace dshgan {

namespace detail {

std::string read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file_bytes(const std::string& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorKind::kIo, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  require(out.good(), ErrorKind::kIo, "short write to " + path);
}

}  // namespace detail

void ArrayContainer::add(std::string name, Tensor value) {
  require(!contains(name), ErrorKind::kShape, "duplicate array name " + name);
  arrays.emplace_back(std::move(name), std::move(value));
}

const Tensor& ArrayContainer::at(std::string_view name) const {
  for (const auto& [n, t] : arrays)
    if (n == name) return t;
  fail(ErrorKind::kMalformedFile, "container has no array named " + std::string(name));
}

bool ArrayContainer::contains(std::string_view name) const {
  for (const auto& entry : arrays)
    if (entry.first == name) return true;
  return false;
}

std::string encode_container(const ArrayContainer& c) {
  std::string out(kContainerMagic);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.header.size()));
  out += c.header;
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(c.arrays.size()));
  for (const auto& [name, t] : c.arrays) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out += name;
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.rank()));
    for (std::size_t d : t.shape()) detail::put_le<std::uint64_t>(out, d);
    for (double v : t.values()) detail::put_le<double>(out, v);
  }
  return out;
}

ArrayContainer decode_container(std::string_view bytes) {
  detail::ByteReader r(bytes, "array container");
  require(r.take(kContainerMagic.size()) == kContainerMagic, ErrorKind::kMalformedFile,
          "bad container magic");
  ArrayContainer c;
  c.header = std::string(r.take(r.get<std::uint32_t>()));
  const auto count = r.get<std::uint32_t>();
  for (std::uint32_t a = 0; a < count; ++a) {
    std::string name(r.take(r.get<std::uint32_t>()));
    const auto rank = r.get<std::uint32_t>();
    Shape shape(rank);
    for (auto& d : shape) d = r.get<std::uint64_t>();
    const std::size_t n = element_count(shape);
    require(r.remaining() / 8 >= n, ErrorKind::kMalformedFile,
            "array " + name + " truncated");
    std::vector<double> values(n);
    for (double& v : values) v = r.get<double>();
    c.arrays.emplace_back(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  require(r.at_end(), ErrorKind::kMalformedFile, "trailing bytes after container");
  return c;
}

void write_container(const ArrayContainer& container, const std::filesystem::path& path) {
  detail::write_file_bytes(path.string(), encode_container(container));
}

ArrayContainer read_container(const std::filesystem::path& path) {
  return decode_container(detail::read_file_bytes(path.string()));
}

}  // namespace dshgan
