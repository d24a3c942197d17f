#include <benchmark/benchmark.h>

#include <random>

#include "rda/diffusion.hpp"
#include "rda/raa.hpp"
#include "rda/synthetic.hpp"

namespace {

std::vector<float> random_row(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> dist;
  std::vector<float> v(dim);
  for (auto& x : v) x = dist(rng);
  return v;
}

void BM_MlpForward(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto params = rda::make_denoiser<float>(dim, {}, 1.0, 1);
  const auto x = random_row(dim + 1, 2);
  for (auto _ : state) benchmark::DoNotOptimize(params.net.forward(x));
}
BENCHMARK(BM_MlpForward)->Arg(16)->Arg(128)->Arg(512);

void BM_Denoise(benchmark::State& state) {
  const auto dim = static_cast<std::size_t>(state.range(0));
  const auto params = rda::make_denoiser<float>(dim, {}, 1.0, 1);
  const auto x = random_row(dim, 3);
  for (auto _ : state) benchmark::DoNotOptimize(rda::denoise(params, std::span<const float>(x), 0.7));
}
BENCHMARK(BM_Denoise)->Arg(16)->Arg(512);

void BM_RaaScore(benchmark::State& state) {
  const auto params = rda::make_denoiser<float>(16, {}, 1.0, 1);
  const auto x = random_row(16, 4);
  const rda::RaaConfig cfg;
  std::uint64_t index = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rda::raa_score(params, std::span<const float>(x), cfg, index++));
}
BENCHMARK(BM_RaaScore);

void BM_TrainEpoch(benchmark::State& state) {
  const auto data = rda::generate(rda::SyntheticSpec::gauss_shift_16());
  rda::TrainConfig cfg;
  cfg.epochs = 1;
  for (auto _ : state) benchmark::DoNotOptimize(rda::train<float>(data.train, cfg, rda::NoiseLevelSampler{}));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * data.train.size()));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
