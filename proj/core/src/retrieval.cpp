#include "dshgan/retrieval.hpp"

#include <algorithm>
#include <bit>

#include "binary_io.hpp"
#include "dshgan/errors.hpp"

namespace dshgan {

std::size_t words_for_bits(std::size_t bits) { return (bits + 63) / 64; }

HashCode::HashCode(std::size_t bits) : bits_(bits), words_(words_for_bits(bits), 0) {}

HashCode HashCode::from_words(std::size_t bits, std::vector<std::uint64_t> words) {
  require(words.size() == words_for_bits(bits), ErrorKind::kShape,
          "word count does not match code length");
  if (bits % 64 != 0 && !words.empty())
    require((words.back() >> (bits % 64)) == 0, ErrorKind::kMalformedFile,
            "hash code has nonzero padding bits");
  HashCode code;
  code.bits_ = bits;
  code.words_ = std::move(words);
  return code;
}

HashCode HashCode::from_bits(std::span<const std::uint8_t> bits) {
  HashCode code(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) code.set(i, bits[i] != 0);
  return code;
}

bool HashCode::bit(std::size_t i) const {
  require(i < bits_, ErrorKind::kShape, "bit index out of range");
  return (words_[i / 64] >> (i % 64)) & 1U;
}

void HashCode::set(std::size_t i, bool on) {
  require(i < bits_, ErrorKind::kShape, "bit index out of range");
  const std::uint64_t mask = std::uint64_t{1} << (i % 64);
  if (on) {
    words_[i / 64] |= mask;
  } else {
    words_[i / 64] &= ~mask;
  }
}

HashCode HashCode::complement() const {
  HashCode out = *this;
  for (auto& w : out.words_) w = ~w;
  if (bits_ % 64 != 0 && !out.words_.empty())
    out.words_.back() &= (std::uint64_t{1} << (bits_ % 64)) - 1;
  return out;
}

HashCode quantize(std::span<const double> relaxed) {
  HashCode code(relaxed.size());
  for (std::size_t i = 0; i < relaxed.size(); ++i) {
    require(relaxed[i] >= 0.0 && relaxed[i] <= 1.0, ErrorKind::kDomain,
            "relaxed code entry outside [0, 1]");
    if (relaxed[i] > 0.5) code.set(i, true);
  }
  return code;
}

std::size_t hamming_distance(const HashCode& a, const HashCode& b) {
  if (a.size() != b.size())
    fail(ErrorKind::kShape, "hash codes of different length " + std::to_string(a.size()) + " and " +
                                std::to_string(b.size()));
  std::size_t d = 0;
  const auto wa = a.words(), wb = b.words();
  for (std::size_t i = 0; i < wa.size(); ++i) d += static_cast<std::size_t>(std::popcount(wa[i] ^ wb[i]));
  return d;
}

void RetrievalIndex::add(std::uint64_t id, HashCode code, LabelVector label) {
  require(code.size() == code_length_, ErrorKind::kShape,
          "code of length " + std::to_string(code.size()) + " added to a " +
              std::to_string(code_length_) + "-bit index");
  require(ids_.insert(id).second, ErrorKind::kShape, "duplicate id " + std::to_string(id) + " in index");
  entries_.push_back({id, std::move(code), std::move(label)});
}

const LabelVector& evaluation_label(const ImageExample& ex) {
  return ex.is_labeled || ex.true_label.size() != ex.label.size() ? ex.label : ex.true_label;
}

std::vector<HashCode> encode_dataset(const Dataset& ds, const HashModelState& model) {
  std::vector<HashCode> codes;
  codes.reserve(ds.size());
  constexpr std::size_t kChunk = 256;
  const std::size_t k = model.config.code_length;
  for (std::size_t begin = 0; begin < ds.size(); begin += kChunk) {
    std::vector<std::size_t> rows;
    for (std::size_t i = begin; i < std::min(ds.size(), begin + kChunk); ++i) rows.push_back(i);
    const Tensor relaxed = hash_forward_batch(model, to_batch(ds, rows));
    for (std::size_t r = 0; r < rows.size(); ++r)
      codes.push_back(quantize(std::span<const double>(relaxed.data() + r * k, k)));
  }
  return codes;
}

RetrievalIndex build_index(const Dataset& db, const HashModelState& model) {
  require(!db.empty(), ErrorKind::kEmptyInput, "cannot index an empty database");
  std::vector<HashCode> codes = encode_dataset(db, model);
  RetrievalIndex index(model.config.code_length);
  for (std::size_t i = 0; i < db.size(); ++i)
    index.add(db.examples[i].id, std::move(codes[i]), evaluation_label(db.examples[i]));
  return index;
}

std::vector<SearchHit> search(const RetrievalIndex& index, const HashCode& query) {
  require(query.size() == index.code_length(), ErrorKind::kShape,
          "query code length differs from the index");
  std::vector<SearchHit> hits;
  hits.reserve(index.size());
  for (const IndexEntry& e : index.entries()) hits.push_back({e.id, hamming_distance(e.code, query)});
  std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  return hits;
}

std::vector<std::uint64_t> lookup_within_radius(const RetrievalIndex& index, const HashCode& query,
                                                std::size_t radius) {
  require(radius <= index.code_length(), ErrorKind::kDomain,
          "radius " + std::to_string(radius) + " exceeds code length");
  require(query.size() == index.code_length(), ErrorKind::kShape,
          "query code length differs from the index");
  std::vector<std::uint64_t> ids;
  for (const IndexEntry& e : index.entries())
    if (hamming_distance(e.code, query) <= radius) ids.push_back(e.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::string encode_code_file(const RetrievalIndex& index, std::size_t class_count) {
  std::string out(kCodeFileMagic);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(index.code_length()));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(class_count));
  detail::put_le<std::uint64_t>(out, index.size());
  for (const IndexEntry& e : index.entries())
    for (std::uint64_t w : e.code.words()) detail::put_le<std::uint64_t>(out, w);
  for (const IndexEntry& e : index.entries()) detail::put_le<std::uint64_t>(out, e.id);
  for (const IndexEntry& e : index.entries()) {
    require(e.label.size() == class_count, ErrorKind::kShape, "label length differs from class count");
    for (std::uint8_t v : e.label.entries()) out.push_back(static_cast<char>(v));
  }
  return out;
}

RetrievalIndex decode_code_file(std::string_view bytes) {
  detail::ByteReader r(bytes, "code file");
  require(r.take(kCodeFileMagic.size()) == kCodeFileMagic, ErrorKind::kMalformedFile,
          "bad code file magic");
  const auto k = r.get<std::uint32_t>();
  const auto c = r.get<std::uint32_t>();
  const auto n = r.get<std::uint64_t>();
  const std::size_t words = words_for_bits(k);
  require(r.remaining() == n * (words * 8 + 8 + c), ErrorKind::kMalformedFile,
          "code file size does not match its header");
  std::vector<HashCode> codes;
  codes.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    std::vector<std::uint64_t> w(words);
    for (auto& v : w) v = r.get<std::uint64_t>();
    codes.push_back(HashCode::from_words(k, std::move(w)));
  }
  std::vector<std::uint64_t> ids(n);
  for (auto& id : ids) id = r.get<std::uint64_t>();
  RetrievalIndex index(k);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::string_view raw = r.take(c);
    std::vector<std::uint8_t> label(raw.begin(), raw.end());
    index.add(ids[i], std::move(codes[i]), LabelVector(std::move(label)));
  }
  return index;
}

void write_code_file(const RetrievalIndex& index, std::size_t class_count,
                     const std::filesystem::path& path) {
  detail::write_file_bytes(path.string(), encode_code_file(index, class_count));
}

RetrievalIndex read_code_file(const std::filesystem::path& path) {
  return decode_code_file(detail::read_file_bytes(path.string()));
}

}  // namespace dshgan
