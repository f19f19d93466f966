#include "dshgan/datasets.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include <json.hpp>

#include "binary_io.hpp"
#include "dshgan/errors.hpp"

namespace dshgan {

// ---------------------------------------------------------------- LabelVector

LabelVector::LabelVector(std::vector<std::uint8_t> entries) : entries_(std::move(entries)) {
  for (std::uint8_t e : entries_)
    require(e <= 1, ErrorKind::kInvalidLabel, "label entries must be 0 or 1");
}

LabelVector LabelVector::one_hot(std::size_t class_count, std::size_t index) {
  require(index < class_count, ErrorKind::kInvalidLabel,
          "class index " + std::to_string(index) + " out of range for " +
              std::to_string(class_count) + " classes");
  LabelVector v(class_count);
  v.entries_[index] = 1;
  return v;
}

LabelVector LabelVector::from_indices(std::size_t class_count,
                                      std::span<const std::size_t> indices) {
  LabelVector v(class_count);
  for (std::size_t j : indices) {
    require(j < class_count, ErrorKind::kInvalidLabel, "class index out of range");
    v.entries_[j] = 1;
  }
  return v;
}

std::size_t LabelVector::positive_count() const noexcept {
  return static_cast<std::size_t>(std::count(entries_.begin(), entries_.end(), 1));
}

bool LabelVector::intersects(const LabelVector& other) const {
  require(size() == other.size(), ErrorKind::kShape, "label vectors of different length");
  for (std::size_t j = 0; j < entries_.size(); ++j)
    if (entries_[j] && other.entries_[j]) return true;
  return false;
}

std::size_t LabelVector::single_index() const {
  require(positive_count() == 1, ErrorKind::kInvalidLabel,
          "expected exactly one positive label, found " + std::to_string(positive_count()));
  return static_cast<std::size_t>(std::find(entries_.begin(), entries_.end(), 1) -
                                  entries_.begin());
}

std::vector<std::size_t> LabelVector::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < entries_.size(); ++j)
    if (entries_[j]) out.push_back(j);
  return out;
}

// ---------------------------------------------------------------- validation

void validate(const Dataset& ds) {
  std::set<std::uint64_t> ids;
  for (const ImageExample& ex : ds.examples) {
    require(ex.pixels.size() == ds.image_shape.pixel_count(), ErrorKind::kShape,
            "example " + std::to_string(ex.id) + " has wrong pixel count");
    for (double p : ex.pixels)
      require(p >= -1.0 && p <= 1.0, ErrorKind::kDomain,
              "example " + std::to_string(ex.id) + " has a pixel outside [-1, 1]");
    require(ex.label.size() == ds.class_count, ErrorKind::kInvalidLabel,
            "example " + std::to_string(ex.id) + " label length differs from class count");
    if (ex.is_labeled) {
      require(!ex.label.is_zero(), ErrorKind::kInvalidLabel, "labeled example with no label");
      if (ds.label_mode == LabelMode::kSingle)
        require(ex.label.positive_count() == 1, ErrorKind::kInvalidLabel,
                "single-label dataset has an example with " +
                    std::to_string(ex.label.positive_count()) + " labels");
    } else {
      require(ex.label.is_zero(), ErrorKind::kInvalidLabel, "unlabeled example carries a label");
    }
    require(ids.insert(ex.id).second, ErrorKind::kShape,
            "duplicate example id " + std::to_string(ex.id));
  }
}

// ---------------------------------------------------------------- CIFAR-10

Dataset parse_cifar10(std::string_view bytes, std::uint64_t first_id) {
  require(bytes.size() % kCifarRecordBytes == 0, ErrorKind::kMalformedFile,
          "CIFAR-10 batch length " + std::to_string(bytes.size()) +
              " is not a multiple of 3073");
  Dataset ds;
  ds.class_count = kCifarClasses;
  ds.label_mode = LabelMode::kSingle;
  ds.image_shape = {3, 32, 32};
  const std::size_t n = bytes.size() / kCifarRecordBytes;
  ds.examples.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const auto* rec = reinterpret_cast<const unsigned char*>(bytes.data() + r * kCifarRecordBytes);
    require(rec[0] < kCifarClasses, ErrorKind::kInvalidLabel,
            "record " + std::to_string(r) + " has label byte " + std::to_string(rec[0]));
    ImageExample ex;
    ex.pixels.resize(kCifarRecordBytes - 1);
    for (std::size_t i = 0; i + 1 < kCifarRecordBytes; ++i)
      ex.pixels[i] = static_cast<double>(rec[i + 1]) / 127.5 - 1.0;
    ex.label = LabelVector::one_hot(kCifarClasses, rec[0]);
    ex.true_label = ex.label;
    ex.is_labeled = true;
    ex.source = Source::kReal;
    ex.id = first_id + r;
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

Dataset load_cifar10(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  if (fs::is_directory(path)) {
    for (int b = 1; b <= 5; ++b) {
      const fs::path p = path / ("data_batch_" + std::to_string(b) + ".bin");
      if (fs::exists(p)) files.push_back(p);
    }
    if (fs::exists(path / "test_batch.bin")) files.push_back(path / "test_batch.bin");
    if (files.empty()) {
      for (const auto& entry : fs::directory_iterator(path))
        if (entry.path().extension() == ".bin") files.push_back(entry.path());
      std::sort(files.begin(), files.end());
    }
    require(!files.empty(), ErrorKind::kIo, "no CIFAR-10 batch files under " + path.string());
  } else {
    files.push_back(path);
  }
  Dataset all;
  all.class_count = kCifarClasses;
  all.label_mode = LabelMode::kSingle;
  all.image_shape = {3, 32, 32};
  for (const fs::path& f : files) {
    Dataset part = parse_cifar10(detail::read_file_bytes(f.string()), all.examples.size());
    for (ImageExample& ex : part.examples) all.examples.push_back(std::move(ex));
  }
  return all;
}

std::string encode_cifar10(const Dataset& ds) {
  require(ds.image_shape == ImageShape{3, 32, 32} && ds.class_count == kCifarClasses,
          ErrorKind::kShape, "CIFAR-10 encoding needs 3x32x32 images over 10 classes");
  std::string out;
  out.reserve(ds.size() * kCifarRecordBytes);
  for (const ImageExample& ex : ds.examples) {
    const LabelVector& label = ex.is_labeled ? ex.label : ex.true_label;
    out.push_back(static_cast<char>(label.single_index()));
    for (double p : ex.pixels) {
      const double byte = std::round((std::clamp(p, -1.0, 1.0) + 1.0) * 127.5);
      out.push_back(static_cast<char>(static_cast<unsigned char>(byte)));
    }
  }
  return out;
}

// ---------------------------------------------------------------- toy data

namespace {

struct Rgb {
  double r, g, b;
};

Rgb hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::fabs(std::fmod(hp, 2.0) - 1.0));
  Rgb rgb{0, 0, 0};
  switch (static_cast<int>(hp) % 6) {
    case 0: rgb = {c, x, 0}; break;
    case 1: rgb = {x, c, 0}; break;
    case 2: rgb = {0, c, x}; break;
    case 3: rgb = {0, x, c}; break;
    case 4: rgb = {x, 0, c}; break;
    default: rgb = {c, 0, x}; break;
  }
  const double m = v - c;
  return {rgb.r + m, rgb.g + m, rgb.b + m};
}

// Shape membership on normalized coordinates (u, v) in roughly [-1, 1].
bool inside_shape(std::size_t pattern, double u, double v) {
  const double r = std::sqrt(u * u + v * v);
  switch (pattern) {
    case 0: return r < 0.6;                                          // disk
    case 1: return std::fabs(u) < 0.55 && std::fabs(v) < 0.55;       // square
    case 2: return std::fabs(v) < 0.3 && std::fabs(u) < 0.9;         // horizontal bar
    case 3: return std::fabs(u) < 0.3 && std::fabs(v) < 0.9;         // vertical bar
    case 4: return r > 0.45 && r < 0.85;                             // ring
    case 5: return (std::fabs(u) < 0.22 || std::fabs(v) < 0.22) && r < 0.9;  // cross
    case 6: return std::fabs(u - v) < 0.4 && r < 1.0;                // diagonal
    case 7: return v > -0.6 && v < 0.7 && std::fabs(u) < (0.7 - v) * 0.6;  // triangle
    case 8: return u * v > 0.0 && std::fabs(u) < 0.8 && std::fabs(v) < 0.8;  // checker
    default: return u < 0.1 && v < 0.1 && u > -0.9 && v > -0.9;      // corner block
  }
}

double pattern_hue(std::size_t pattern) {
  // Golden-ratio spacing keeps any prefix of patterns well separated in hue.
  const double h = static_cast<double>(pattern) * 0.6180339887498949;
  return h - std::floor(h);
}

void render_pattern(std::vector<double>& pixels, std::size_t size, std::size_t pattern,
                    std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double cx = (unit(rng) - 0.5) * 0.5;
  const double cy = (unit(rng) - 0.5) * 0.5;
  const double scale = 0.8 + 0.4 * unit(rng);
  const Rgb color = hsv_to_rgb(pattern_hue(pattern) + (unit(rng) - 0.5) * 0.08,
                               0.7 + 0.3 * unit(rng), 0.7 + 0.3 * unit(rng));
  const std::array<double, 3> channel{color.r * 2.0 - 1.0, color.g * 2.0 - 1.0,
                                      color.b * 2.0 - 1.0};
  const std::size_t plane = size * size;
  for (std::size_t y = 0; y < size; ++y) {
    for (std::size_t x = 0; x < size; ++x) {
      const double u = ((static_cast<double>(x) + 0.5) / static_cast<double>(size) * 2.0 - 1.0 - cx) / scale;
      const double v = ((static_cast<double>(y) + 0.5) / static_cast<double>(size) * 2.0 - 1.0 - cy) / scale;
      if (!inside_shape(pattern, u, v)) continue;
      for (std::size_t c = 0; c < 3; ++c) pixels[c * plane + y * size + x] = channel[c];
    }
  }
}

}  // namespace

Dataset make_toy_dataset(std::size_t class_count, std::size_t per_class, std::size_t image_size,
                         LabelMode label_mode, std::uint64_t seed) {
  require(class_count >= 2 && per_class >= 1 && image_size >= 8, ErrorKind::kConfiguration,
          "toy dataset needs class_count >= 2, per_class >= 1, image_size >= 8");
  require(class_count <= kToyPatternCount, ErrorKind::kUnsupportedConfiguration,
          "toy dataset has only " + std::to_string(kToyPatternCount) +
              " distinct patterns; requested " + std::to_string(class_count));
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.08);

  Dataset ds;
  ds.class_count = class_count;
  ds.label_mode = label_mode;
  ds.image_shape = {3, image_size, image_size};
  const std::size_t n = class_count * per_class;
  ds.examples.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t primary = i / per_class;
    std::vector<std::size_t> classes{primary};
    if (label_mode == LabelMode::kMulti) {
      const std::size_t extra =
          std::min<std::size_t>(static_cast<std::size_t>(unit(rng) * 3.0), class_count - 1);
      while (classes.size() < extra + 1) {
        const auto j = static_cast<std::size_t>(unit(rng) * static_cast<double>(class_count)) %
                       class_count;
        if (std::find(classes.begin(), classes.end(), j) == classes.end()) classes.push_back(j);
      }
      std::sort(classes.begin(), classes.end());
    }

    ImageExample ex;
    ex.pixels.assign(ds.image_shape.pixel_count(), 0.0);
    const double background = -0.8 + 0.4 * unit(rng);
    for (double& p : ex.pixels) p = background;
    for (std::size_t j : classes) render_pattern(ex.pixels, image_size, j, rng);
    for (double& p : ex.pixels) p = std::clamp(p + noise(rng), -1.0, 1.0);

    ex.label = LabelVector::from_indices(class_count, classes);
    ex.true_label = ex.label;
    ex.is_labeled = true;
    ex.source = Source::kReal;
    ex.id = i;
    ds.examples.push_back(std::move(ex));
  }
  return ds;
}

// ---------------------------------------------------------------- splits

namespace {

// Chooses `per_class` distinct rows per class among rows with a visible label.
std::vector<bool> choose_per_class(const Dataset& ds, std::size_t per_class, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<bool> chosen(ds.size(), false);
  for (std::size_t j = 0; j < ds.class_count; ++j) {
    std::vector<std::size_t> candidates;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      const ImageExample& ex = ds.examples[i];
      if (ex.is_labeled && ex.label[j] && !chosen[i]) candidates.push_back(i);
    }
    require(candidates.size() >= per_class, ErrorKind::kInfeasibleSplit,
            "class " + std::to_string(j) + " has " + std::to_string(candidates.size()) +
                " available members, need " + std::to_string(per_class));
    std::shuffle(candidates.begin(), candidates.end(), rng);
    for (std::size_t k = 0; k < per_class; ++k) chosen[candidates[k]] = true;
  }
  return chosen;
}

Dataset empty_like(const Dataset& ds) {
  Dataset out;
  out.class_count = ds.class_count;
  out.label_mode = ds.label_mode;
  out.image_shape = ds.image_shape;
  return out;
}

}  // namespace

Split split_supervised(const Dataset& ds, std::size_t labeled_per_class, std::uint64_t seed) {
  const std::vector<bool> chosen = choose_per_class(ds, labeled_per_class, seed);
  Split out{empty_like(ds), empty_like(ds)};
  for (std::size_t i = 0; i < ds.size(); ++i) {
    ImageExample ex = ds.examples[i];
    if (chosen[i]) {
      out.first.examples.push_back(std::move(ex));
    } else {
      if (ex.true_label.size() != ds.class_count) ex.true_label = ex.label;
      ex.label = LabelVector(ds.class_count);
      ex.is_labeled = false;
      out.second.examples.push_back(std::move(ex));
    }
  }
  return out;
}

Split split_queries(const Dataset& ds, std::size_t per_class, std::uint64_t seed) {
  const std::vector<bool> chosen = choose_per_class(ds, per_class, seed);
  Split out{empty_like(ds), empty_like(ds)};
  for (std::size_t i = 0; i < ds.size(); ++i)
    (chosen[i] ? out.first : out.second).examples.push_back(ds.examples[i]);
  return out;
}

Dataset merge(const Dataset& a, const Dataset& b) {
  require(a.class_count == b.class_count && a.image_shape == b.image_shape &&
              a.label_mode == b.label_mode,
          ErrorKind::kShape, "cannot merge datasets with different layouts");
  Dataset out = a;
  out.examples.insert(out.examples.end(), b.examples.begin(), b.examples.end());
  return out;
}

Tensor to_batch(const Dataset& ds, std::span<const std::size_t> rows) {
  const ImageShape& s = ds.image_shape;
  Tensor batch({rows.size(), s.channels, s.height, s.width});
  const std::size_t n = s.pixel_count();
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const ImageExample& ex = ds.examples.at(rows[r]);
    require(ex.pixels.size() == n, ErrorKind::kShape, "example pixel count mismatch");
    std::copy(ex.pixels.begin(), ex.pixels.end(), batch.data() + r * n);
  }
  return batch;
}

Tensor to_batch(std::span<const ImageExample* const> examples, const ImageShape& s) {
  Tensor batch({examples.size(), s.channels, s.height, s.width});
  const std::size_t n = s.pixel_count();
  for (std::size_t r = 0; r < examples.size(); ++r) {
    require(examples[r]->pixels.size() == n, ErrorKind::kShape, "example pixel count mismatch");
    std::copy(examples[r]->pixels.begin(), examples[r]->pixels.end(), batch.data() + r * n);
  }
  return batch;
}

// ---------------------------------------------------------------- container

ArrayContainer to_container(const Dataset& ds, std::optional<std::uint64_t> seed) {
  nlohmann::json header{
      {"kind", "dataset"},
      {"class_count", ds.class_count},
      {"label_mode", ds.label_mode == LabelMode::kSingle ? "single" : "multi"},
      {"image_shape", {ds.image_shape.channels, ds.image_shape.height, ds.image_shape.width}},
      {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
  };
  const std::size_t n = ds.size(), c = ds.class_count, p = ds.image_shape.pixel_count();
  Tensor pixels({n, ds.image_shape.channels, ds.image_shape.height, ds.image_shape.width});
  Tensor labels({n, c}), true_labels({n, c}), flags({n, 2}), ids({n});
  for (std::size_t i = 0; i < n; ++i) {
    const ImageExample& ex = ds.examples[i];
    std::copy(ex.pixels.begin(), ex.pixels.end(), pixels.data() + i * p);
    for (std::size_t j = 0; j < c; ++j) {
      labels[i * c + j] = ex.label[j] ? 1.0 : 0.0;
      true_labels[i * c + j] = ex.true_label.size() == c && ex.true_label[j] ? 1.0 : 0.0;
    }
    flags[i * 2] = ex.is_labeled ? 1.0 : 0.0;
    flags[i * 2 + 1] = static_cast<double>(ex.source);
    ids[i] = static_cast<double>(ex.id);
  }
  ArrayContainer out;
  out.header = header.dump();
  out.add("pixels", std::move(pixels));
  out.add("labels", std::move(labels));
  out.add("true_labels", std::move(true_labels));
  out.add("flags", std::move(flags));
  out.add("ids", std::move(ids));
  return out;
}

Dataset from_container(const ArrayContainer& container) {
  const auto header = nlohmann::json::parse(container.header, nullptr, false);
  require(!header.is_discarded() && header.value("kind", "") == "dataset",
          ErrorKind::kMalformedFile, "container does not hold a dataset");
  Dataset ds;
  ds.class_count = header.at("class_count").get<std::size_t>();
  ds.label_mode = header.at("label_mode") == "multi" ? LabelMode::kMulti : LabelMode::kSingle;
  const auto shape = header.at("image_shape").get<std::vector<std::size_t>>();
  require(shape.size() == 3, ErrorKind::kMalformedFile, "image_shape must have 3 entries");
  ds.image_shape = {shape[0], shape[1], shape[2]};
  const Tensor& pixels = container.at("pixels");
  const Tensor& labels = container.at("labels");
  const Tensor& true_labels = container.at("true_labels");
  const Tensor& flags = container.at("flags");
  const Tensor& ids = container.at("ids");
  const std::size_t n = ids.size(), c = ds.class_count, p = ds.image_shape.pixel_count();
  require(pixels.size() == n * p && labels.size() == n * c && true_labels.size() == n * c &&
              flags.size() == n * 2,
          ErrorKind::kMalformedFile, "dataset arrays have inconsistent sizes");
  ds.examples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    ImageExample& ex = ds.examples[i];
    ex.pixels.assign(pixels.data() + i * p, pixels.data() + (i + 1) * p);
    std::vector<std::uint8_t> l(c), t(c);
    for (std::size_t j = 0; j < c; ++j) {
      l[j] = labels[i * c + j] != 0.0;
      t[j] = true_labels[i * c + j] != 0.0;
    }
    ex.label = LabelVector(std::move(l));
    ex.true_label = LabelVector(std::move(t));
    ex.is_labeled = flags[i * 2] != 0.0;
    ex.source = flags[i * 2 + 1] != 0.0 ? Source::kSynthetic : Source::kReal;
    ex.id = static_cast<std::uint64_t>(ids[i]);
  }
  return ds;
}

}  // namespace dshgan
