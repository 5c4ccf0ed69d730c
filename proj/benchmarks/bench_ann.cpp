#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "hybridfm/ann.hpp"
#include "hybridfm/rng.hpp"

namespace {

using namespace hybridfm;

std::vector<float> random_points(std::size_t n, std::uint32_t dim,
                                 std::uint64_t seed) {
  std::vector<float> values(n * dim);
  Rng rng(seed);
  for (auto& v : values) {
    v = static_cast<float>(rng.normal());
  }
  return values;
}

void BM_TopKExact(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::uint32_t dim = 64;
  const auto values = random_points(n, dim, 11);
  const EmbeddingTableView table{values.data(), n, dim};
  std::uint32_t id = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(top_k_exact(table, id, 10));
    id = (id + 17) % static_cast<std::uint32_t>(n);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}
BENCHMARK(BM_TopKExact)->ArgName("n")->Arg(1000)->Arg(10000)->Arg(100000);

void BM_ForestBuild(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::uint32_t dim = 64;
  const auto values = random_points(n, dim, 12);
  const EmbeddingTableView table{values.data(), n, dim};
  for (auto _ : state) {
    benchmark::DoNotOptimize(build_rp_forest(table, 8, 64, 13));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) * n);
}
BENCHMARK(BM_ForestBuild)
    ->ArgName("n")
    ->Arg(10000)
    ->Arg(100000)
    ->Unit(benchmark::kMillisecond);

void BM_ForestQuery(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const std::uint32_t dim = 64;
  const auto values = random_points(n, dim, 12);
  const EmbeddingTableView table{values.data(), n, dim};
  const auto forest = build_rp_forest(table, 8, 64, 13);
  std::uint32_t id = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(query_forest(forest, table, table.row(id), 10));
    id = (id + 29) % static_cast<std::uint32_t>(n);
  }
}
BENCHMARK(BM_ForestQuery)->ArgName("n")->Arg(10000)->Arg(100000);

void BM_LshCode(benchmark::State& state) {
  const std::uint32_t dim = 64;
  const auto planes = make_hyperplanes(256, dim, 14);
  const auto values = random_points(1024, dim, 15);
  const EmbeddingTableView table{values.data(), 1024, dim};
  std::uint32_t id = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(lsh_code(table.row(id), planes));
    id = (id + 1) % 1024;
  }
}
BENCHMARK(BM_LshCode);

}  // namespace

BENCHMARK_MAIN();
