#include <benchmark/benchmark.h>

#include "dpmpm/model.hpp"

using namespace dpmpm;

namespace {

CategoricalDataset fixture(std::size_t n) {
  const Schema schema(std::vector<Variable>{
      {"A", {"a", "b", "c", "d", "e"}}, {"B", {"f", "m"}}, {"C", {"x", "y", "z"}}});
  MixtureTruth truth;
  truth.weights = {0.5, 0.3, 0.2};
  truth.component_pmfs = {{{0.4, 0.3, 0.1, 0.1, 0.1}, {0.7, 0.3}, {0.6, 0.3, 0.1}},
                          {{0.1, 0.1, 0.2, 0.3, 0.3}, {0.2, 0.8}, {0.1, 0.3, 0.6}},
                          {{0.2, 0.2, 0.2, 0.2, 0.2}, {0.5, 0.5}, {0.3, 0.4, 0.3}}};
  return inject_mcar(generate_from_mixture(truth, n, schema, 1), 0.3, 2);
}

void BM_sample_z_and_impute(benchmark::State& bs) {
  const auto data = fixture(static_cast<std::size_t>(bs.range(0)));
  HyperParams hp;
  hp.K = static_cast<int>(bs.range(1));
  Rng rng(3);
  auto state = init_state(data, hp, rng);
  for (auto _ : bs) sample_z_and_impute(state, data, rng);
  bs.SetItemsProcessed(bs.iterations() * bs.range(0) * bs.range(1) * 3);
}

void BM_gibbs_step(benchmark::State& bs) {
  const auto data = fixture(static_cast<std::size_t>(bs.range(0)));
  HyperParams hp;
  hp.K = static_cast<int>(bs.range(1));
  Rng rng(4);
  auto state = init_state(data, hp, rng);
  for (auto _ : bs) gibbs_step(state, data, hp, rng);
}

}  // namespace

BENCHMARK(BM_sample_z_and_impute)->Args({1000, 20})->Args({1000, 80})->Args({4000, 80})->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_gibbs_step)->Args({1000, 80})->Unit(benchmark::kMicrosecond);

BENCHMARK_MAIN();
