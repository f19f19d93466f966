#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "dshgan/datasets.hpp"
#include "dshgan/gan.hpp"
#include "dshgan/hashmodel.hpp"
#include "dshgan/retrieval.hpp"

namespace {

using namespace dshgan;

HashCode random_code(std::size_t k, std::mt19937_64& rng) {
  std::vector<std::uint8_t> bits(k);
  for (auto& b : bits) b = static_cast<std::uint8_t>(rng() & 1);
  return HashCode::from_bits(bits);
}

RetrievalIndex random_index(std::size_t n, std::size_t k, std::mt19937_64& rng) {
  RetrievalIndex index(k);
  for (std::size_t i = 0; i < n; ++i) index.add(i, random_code(k, rng), LabelVector::one_hot(10, i % 10));
  return index;
}

void BM_HammingDistance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const auto k = static_cast<std::size_t>(state.range(0));
  const HashCode a = random_code(k, rng), b = random_code(k, rng);
  for (auto _ : state) benchmark::DoNotOptimize(hamming_distance(a, b));
}
BENCHMARK(BM_HammingDistance)->Arg(12)->Arg(48)->Arg(256);

void BM_Search(benchmark::State& state) {
  std::mt19937_64 rng(2);
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto k = static_cast<std::size_t>(state.range(1));
  const RetrievalIndex index = random_index(n, k, rng);
  const HashCode q = random_code(k, rng);
  for (auto _ : state) benchmark::DoNotOptimize(search(index, q));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_Search)->Args({1000, 12})->Args({10000, 12})->Args({10000, 48})->Unit(benchmark::kMicrosecond);

void BM_LookupRadius2(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const RetrievalIndex index = random_index(10000, 12, rng);
  const HashCode q = random_code(12, rng);
  for (auto _ : state) benchmark::DoNotOptimize(lookup_within_radius(index, q, 2));
}
BENCHMARK(BM_LookupRadius2)->Unit(benchmark::kMicrosecond);

Tensor random_images(std::size_t batch, const ImageShape& shape, std::mt19937_64& rng) {
  Tensor t({batch, shape.channels, shape.height, shape.width});
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : t.values()) v = u(rng);
  return t;
}

void BM_HashForwardBatch(benchmark::State& state) {
  HashModelConfig cfg;
  cfg.image_shape = {3, 8, 8};
  cfg.class_count = 4;
  cfg.code_length = 48;
  const HashModelState model = init_hash_model(cfg, 4);
  std::mt19937_64 rng(5);
  const auto batch = static_cast<std::size_t>(state.range(0));
  const Tensor images = random_images(batch, cfg.image_shape, rng);
  for (auto _ : state) benchmark::DoNotOptimize(hash_forward_batch(model, images));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_HashForwardBatch)->Arg(1)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_GenerateBatch(benchmark::State& state) {
  GanConfig cfg;
  cfg.image_shape = {3, 8, 8};
  cfg.class_count = 4;
  const GanState gan = init_gan(cfg, 6);
  std::mt19937_64 rng(7);
  const auto batch = static_cast<std::size_t>(state.range(0));
  std::vector<LabelVector> labels;
  std::vector<NoiseVector> noise;
  for (std::size_t i = 0; i < batch; ++i) {
    labels.push_back(LabelVector::one_hot(cfg.class_count, i % cfg.class_count));
    noise.push_back(sample_noise(cfg.generator.noise_dim, rng));
  }
  for (auto _ : state) benchmark::DoNotOptimize(generate_batch(gan, labels, noise));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateBatch)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
