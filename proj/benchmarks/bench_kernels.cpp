#include <benchmark/benchmark.h>

#include <random>

#include "tuckert/eval.hpp"
#include "tuckert/objective.hpp"
#include "tuckert/optimizer.hpp"

namespace {

using namespace tuckert;

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

void BM_TrilinearForm(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  Core3Tensor<double> w(d, d, d);
  const auto wv = random_vector(w.size(), rng);
  std::copy(wv.begin(), wv.end(), w.values().begin());
  const auto a = random_vector(d, rng), b = random_vector(d, rng), c = random_vector(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(trilinear_form<double>(w, a, b, c));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_TrilinearForm)->Arg(32)->Arg(100);

// One query ranked against an ICEWS14-sized entity table.
void BM_ScoreObjects(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const auto params = init_params<float>(ModelShape{7128, 230, 365, d}, ModelKind::TuckERTNT, 1);
  for (auto _ : state) benchmark::DoNotOptimize(score_objects(params, 3, 7, 11));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ScoreObjects)->Arg(32)->Arg(100)->Unit(benchmark::kMicrosecond);

// One training step (objective + Adagrad) on a 1000-fact batch at ICEWS14 size.
void BM_TrainStep(benchmark::State& state) {
  const auto d = static_cast<std::size_t>(state.range(0));
  const ModelShape shape{7128, 230, 365, d};
  auto params = init_params<float>(shape, ModelKind::TuckERTNT, 2);
  auto opt = AdagradState<float>::create(params);
  std::mt19937_64 rng(3);
  std::vector<Quadruple> batch(1000);
  for (auto& q : batch) {
    q = {static_cast<std::uint32_t>(rng() % 7128), static_cast<std::uint32_t>(rng() % 460),
         static_cast<std::uint32_t>(rng() % 7128), static_cast<std::uint32_t>(rng() % 365)};
  }
  Gradients grads;
  const RegularizerChoice reg;
  for (auto _ : state) {
    const auto r = batch_objective(params, batch, TimeBinding::Predicate, reg, grads,
                                   static_cast<int>(state.range(1)));
    adagrad_step(params, grads, opt);
    benchmark::DoNotOptimize(r.total);
  }
  state.SetItemsProcessed(state.iterations() * 1000);
}
BENCHMARK(BM_TrainStep)
    ->Args({32, 1})
    ->Args({100, 1})
    ->Args({32, 4})
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
