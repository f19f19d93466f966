#include "dshgan/lsh.hpp"

#include <algorithm>
#include <random>

#include <json.hpp>

#include "dshgan/errors.hpp"

namespace dshgan {

namespace {

double dot_row(const Tensor& m, std::size_t row, std::span<const double> x) {
  const double* w = m.data() + row * x.size();
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += w[j] * x[j];
  return s;
}

double median(std::vector<double> v) {
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double upper = v[mid];
  if (v.size() % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

}  // namespace

LshModel fit_lsh(std::span<const std::vector<double>> features, std::size_t code_length,
                 std::uint64_t seed) {
  require(!features.empty(), ErrorKind::kEmptyInput, "LSH needs at least one training feature");
  require(code_length >= 1, ErrorKind::kConfiguration, "LSH code length must be positive");
  const std::size_t d = features.front().size();
  require(d >= 1, ErrorKind::kShape, "LSH features must be nonempty vectors");
  for (const auto& f : features)
    require(f.size() == d, ErrorKind::kShape, "LSH features of unequal dimension");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  LshModel model;
  model.projection = Tensor({code_length, d});
  for (double& w : model.projection.storage()) w = normal(rng);

  model.thresholds.resize(code_length);
  std::vector<double> projected(features.size());
  for (std::size_t k = 0; k < code_length; ++k) {
    for (std::size_t i = 0; i < features.size(); ++i) projected[i] = dot_row(model.projection, k, features[i]);
    model.thresholds[k] = median(projected);
  }
  return model;
}

HashCode lsh_encode(const LshModel& model, std::span<const double> feature) {
  require(feature.size() == model.feature_dim(), ErrorKind::kShape,
          "feature of dimension " + std::to_string(feature.size()) + " for an LSH model over " +
              std::to_string(model.feature_dim()));
  HashCode code(model.code_length());
  for (std::size_t k = 0; k < model.code_length(); ++k)
    if (dot_row(model.projection, k, feature) > model.thresholds[k]) code.set(k, true);
  return code;
}

std::vector<std::vector<double>> pixel_features(const Dataset& ds) {
  std::vector<std::vector<double>> out;
  out.reserve(ds.size());
  for (const ImageExample& ex : ds.examples) out.push_back(ex.pixels);
  return out;
}

std::vector<HashCode> lsh_encode_dataset(const Dataset& ds, const LshModel& model) {
  std::vector<HashCode> codes;
  codes.reserve(ds.size());
  for (const ImageExample& ex : ds.examples) codes.push_back(lsh_encode(model, ex.pixels));
  return codes;
}

RetrievalIndex build_lsh_index(const Dataset& db, const LshModel& model) {
  require(!db.empty(), ErrorKind::kEmptyInput, "cannot index an empty database");
  RetrievalIndex index(model.code_length());
  for (const ImageExample& ex : db.examples)
    index.add(ex.id, lsh_encode(model, ex.pixels), evaluation_label(ex));
  return index;
}

ArrayContainer to_container(const LshModel& model) {
  ArrayContainer out;
  out.header = nlohmann::json{{"kind", "lsh"}, {"feature_extractor", model.feature_extractor}}.dump();
  out.add("projection", model.projection);
  out.add("thresholds", Tensor({model.thresholds.size()}, model.thresholds));
  return out;
}

LshModel lsh_from_container(const ArrayContainer& container) {
  const auto header = nlohmann::json::parse(container.header, nullptr, false);
  require(!header.is_discarded() && header.value("kind", "") == "lsh", ErrorKind::kMalformedFile,
          "container does not hold an LSH model");
  LshModel model;
  model.feature_extractor = header.value("feature_extractor", std::string(kRawPixelFeatures));
  model.projection = container.at("projection");
  const Tensor& t = container.at("thresholds");
  model.thresholds = t.storage();
  require(model.projection.rank() == 2 && model.projection.dim(0) == model.thresholds.size(),
          ErrorKind::kMalformedFile, "LSH projection and thresholds disagree");
  return model;
}

}  // namespace dshgan
