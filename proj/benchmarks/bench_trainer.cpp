#include <benchmark/benchmark.h>

#include <cstdint>
#include <vector>

#include "hybridfm/dataset.hpp"
#include "hybridfm/model.hpp"
#include "hybridfm/synthetic.hpp"
#include "hybridfm/trainer.hpp"

namespace {

using namespace hybridfm;

struct Fixture {
  Dataset dataset;
  FeatureMapping mapping;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SyntheticSpec spec;
    spec.users = 4000;
    spec.items = 1000;
    spec.tags = 100;
    spec.groups = 10;
    spec.tags_per_item = 3;
    spec.latent_dim = 8;
    spec.interactions_per_user = 25;
    spec.seed = 9;
    Fixture built{generate_synthetic(spec), {}};
    built.mapping =
        build_feature_mapping(built.dataset, ModelVariant::kLightFmTags);
    return built;
  }();
  return f;
}

void BM_TrainEpoch(benchmark::State& state) {
  const auto& f = fixture();
  ModelState model(static_cast<std::uint32_t>(state.range(0)),
                   f.mapping.user_features.size(),
                   f.mapping.item_features.size());
  initialize_embeddings(model, 42);
  TrainConfig config;
  config.threads = static_cast<std::uint32_t>(state.range(1));
  for (auto _ : state) {
    train_epoch(model, f.mapping, f.dataset.interactions, config);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          f.dataset.interactions.size());
}
BENCHMARK(BM_TrainEpoch)
    ->ArgNames({"d", "threads"})
    ->Args({32, 1})
    ->Args({32, 2})
    ->Args({32, 4})
    ->Args({128, 1})
    ->Args({128, 4})
    ->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const auto& f = fixture();
  ModelState model(static_cast<std::uint32_t>(state.range(0)),
                   f.mapping.user_features.size(),
                   f.mapping.item_features.size());
  initialize_embeddings(model, 42);
  const auto& pairs = f.dataset.interactions.all();
  for (auto _ : state) {
    double sum = 0.0;
    for (const auto& t : pairs) {
      sum += predict(model, f.mapping, t.user, t.item);
    }
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          pairs.size());
}
BENCHMARK(BM_Predict)->ArgName("d")->Arg(32)->Arg(128)->Unit(
    benchmark::kMillisecond);

void BM_LogLikelihood(benchmark::State& state) {
  const auto& f = fixture();
  ModelState model(32, f.mapping.user_features.size(),
                   f.mapping.item_features.size());
  initialize_embeddings(model, 42);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        log_likelihood(model, f.mapping, f.dataset.interactions));
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations()) *
                          f.dataset.interactions.size());
}
BENCHMARK(BM_LogLikelihood)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
