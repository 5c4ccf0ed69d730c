#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <set>
#include <span>
#include <sstream>
#include <tuple>
#include <vector>

#include "hybridfm/errors.hpp"
#include "hybridfm/experiments.hpp"
#include "hybridfm/metrics.hpp"
#include "hybridfm/rng.hpp"
#include "hybridfm/splits.hpp"
#include "hybridfm/synthetic.hpp"
#include "support/oracles.hpp"

using namespace hybridfm;

namespace {

std::set<std::tuple<std::uint32_t, std::uint32_t, bool>> triples(
    const InteractionSet& set) {
  std::set<std::tuple<std::uint32_t, std::uint32_t, bool>> out;
  for (const auto& t : set.all()) {
    out.insert({t.user, t.item, t.positive});
  }
  return out;
}

InteractionSet random_interactions(std::size_t n_users, std::size_t n_items,
                                   std::size_t per_user, std::uint64_t seed) {
  Rng rng(seed);
  InteractionSet data;
  std::vector<std::uint32_t> items(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    items[i] = static_cast<std::uint32_t>(i);
  }
  for (std::uint32_t u = 0; u < n_users; ++u) {
    rng.shuffle(items);
    for (std::size_t k = 0; k < per_user; ++k) {
      data.add(u, items[k], rng.uniform() < 0.5);
    }
  }
  return data;
}

void check_partition(const InteractionSet& data, const DatasetSplit& split) {
  CHECK(split.train.size() + split.validation.size() + split.test.size() ==
        data.size());
  auto all = triples(split.train);
  for (const auto& t : triples(split.validation)) {
    CHECK(all.insert(t).second);
  }
  for (const auto& t : triples(split.test)) {
    CHECK(all.insert(t).second);
  }
  CHECK(all == triples(data));
}

}  // namespace

TEST_CASE("per-user ranking quality on hand-checked cases") {
  const auto auc = [](std::vector<double> s, std::vector<bool> l) {
    // spans over vector<bool> do not exist; copy into a plain array
    auto flags = std::make_unique<bool[]>(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
      flags[i] = l[i];
    }
    return user_auc(s, std::span<const bool>(flags.get(), l.size()));
  };

  CHECK(auc({0.9, 0.8, 0.7, 0.6}, {true, false, true, false}) ==
        doctest::Approx(0.75));
  CHECK(auc({0.5, 0.5}, {true, false}) == doctest::Approx(0.5));
  CHECK(auc({1.0, 1.0, 1.0, 1.0}, {true, true, false, false}) ==
        doctest::Approx(0.5));
  CHECK(auc({0.2, 0.9}, {true, false}) == doctest::Approx(0.0));
  CHECK(auc({0.9, 0.2}, {true, false}) == doctest::Approx(1.0));
  // midranks: scores 1,2,2,3 with labels 0,1,0,1
  CHECK(auc({1.0, 2.0, 2.0, 3.0}, {false, true, false, true}) ==
        doctest::Approx(0.875));

  CHECK_FALSE(auc({0.1, 0.2}, {true, true}).has_value());
  CHECK_FALSE(auc({0.1, 0.2}, {false, false}).has_value());
  CHECK_FALSE(auc({}, {}).has_value());
}

TEST_CASE("mean ranking quality averages qualifying users only") {
  InteractionSet test;
  test.add(0, 0, true);
  test.add(0, 1, false);
  test.add(1, 0, true);
  test.add(1, 1, false);
  test.add(2, 0, true);  // single-class user, skipped
  const std::vector<double> scores = {0.9, 0.1, 0.2, 0.8, 0.5};
  // user 0 ranks perfectly, user 1 inversely: mean 0.5
  CHECK(mean_auc(scores, test) == doctest::Approx(0.5));
}

TEST_CASE("mean ranking quality matches the pair-counting oracle") {
  Rng rng(314);
  for (int config = 0; config < 100; ++config) {
    InteractionSet test;
    std::vector<double> scores;
    const std::size_t n_users = 1 + rng.below(5);
    for (std::uint32_t u = 0; u < n_users; ++u) {
      const std::size_t n = 2 + rng.below(7);
      for (std::uint32_t j = 0; j < n; ++j) {
        bool label = rng.uniform() < 0.5;
        if (u == 0 && j < 2) {
          label = j == 0;  // guarantee one qualifying user
        }
        test.add(u, j, label);
        // coarse grid of score values so ties are frequent
        scores.push_back(static_cast<double>(rng.below(5)) / 4.0);
      }
    }
    CAPTURE(config);
    const double got = mean_auc(scores, test);
    const double want = oracles::mean_auc_all_pairs(scores, test);
    CHECK(std::abs(got - want) <= 1e-10);
  }
}

TEST_CASE("mean ranking quality rejects bad input") {
  InteractionSet test;
  test.add(0, 0, true);
  test.add(0, 1, false);
  std::vector<double> wrong_size = {0.5};
  CHECK_THROWS_AS(mean_auc(wrong_size, test), ValidationError);

  InteractionSet one_sided;
  one_sided.add(0, 0, true);
  one_sided.add(1, 1, true);
  std::vector<double> scores = {0.5, 0.5};
  CHECK_THROWS_AS(mean_auc(scores, one_sided), ValidationError);
}

TEST_CASE("warm split keeps every entity in training") {
  const auto data = random_interactions(15, 12, 6, 21);
  const auto split = warm_split(data, 0.25, 0.1, 7);
  check_partition(data, split);

  const auto k_test = static_cast<std::size_t>(
      std::llround(0.25 * static_cast<double>(data.size())));
  CHECK(split.test.size() == k_test);
  const auto k_val = static_cast<std::size_t>(std::llround(
      0.1 * static_cast<double>(data.size() - k_test)));
  CHECK(split.validation.size() == k_val);

  std::set<std::uint32_t> train_users;
  std::set<std::uint32_t> train_items;
  for (const auto& t : split.train.all()) {
    train_users.insert(t.user);
    train_items.insert(t.item);
  }
  for (const auto& t : data.all()) {
    CHECK(train_users.contains(t.user));
    CHECK(train_items.contains(t.item));
  }

  const auto same = warm_split(data, 0.25, 0.1, 7);
  CHECK(triples(same.test) == triples(split.test));
  CHECK(triples(same.validation) == triples(split.validation));
  const auto other = warm_split(data, 0.25, 0.1, 8);
  CHECK(triples(other.test) != triples(split.test));
}

TEST_CASE("warm split rejects impossible requests") {
  InteractionSet one_each;
  for (std::uint32_t i = 0; i < 5; ++i) {
    one_each.add(i, i, true);  // removing any pair strands an entity
  }
  CHECK_THROWS_AS(warm_split(one_each, 0.2, 0.0, 1), ValidationError);

  const auto data = random_interactions(5, 5, 3, 3);
  CHECK_THROWS_AS(warm_split(data, 1.0, 0.1, 1), ValidationError);
  CHECK_THROWS_AS(warm_split(data, -0.1, 0.1, 1), ValidationError);
  CHECK_THROWS_AS(warm_split(data, 0.2, 1.5, 1), ValidationError);
  CHECK_THROWS_AS(warm_split(InteractionSet{}, 0.2, 0.1, 1), ValidationError);
}

TEST_CASE("cold split holds out whole items") {
  const auto data = random_interactions(15, 12, 6, 22);
  const auto split = cold_item_split(data, 0.25, 0.1, 9);
  check_partition(data, split);
  CHECK(split.test.size() > 0);

  std::set<std::uint32_t> test_items;
  for (const auto& t : split.test.all()) {
    test_items.insert(t.item);
  }
  CHECK(test_items.size() == 3);  // llround(0.25 * 12)
  for (const auto& t : split.train.all()) {
    CHECK_FALSE(test_items.contains(t.item));
  }
  for (const auto& t : split.validation.all()) {
    CHECK_FALSE(test_items.contains(t.item));
  }
  // every interaction of a held-out item lands in test
  for (const auto& t : data.all()) {
    if (test_items.contains(t.item)) {
      CHECK(split.test.contains(t.user, t.item));
    }
  }

  const auto same = cold_item_split(data, 0.25, 0.1, 9);
  CHECK(triples(same.test) == triples(split.test));

  // tiny fractions still hold out at least one item
  const auto minimal = cold_item_split(data, 0.01, 0.0, 9);
  std::set<std::uint32_t> minimal_items;
  for (const auto& t : minimal.test.all()) {
    minimal_items.insert(t.item);
  }
  CHECK(minimal_items.size() == 1);
}

TEST_CASE("cold split refuses to hold out everything") {
  InteractionSet data;
  data.add(0, 0, true);
  data.add(0, 1, false);
  data.add(1, 0, false);
  data.add(1, 1, true);
  CHECK_THROWS_AS(cold_item_split(data, 0.9, 0.0, 1), ValidationError);
}

TEST_CASE("split kind names round trip") {
  CHECK(split_kind_name(SplitKind::kWarm) == "warm");
  CHECK(split_kind_name(SplitKind::kColdItem) == "cold");
  CHECK(parse_split_kind("warm") == SplitKind::kWarm);
  CHECK(parse_split_kind("cold") == SplitKind::kColdItem);
  CHECK_THROWS_AS(parse_split_kind("loocv"), ValidationError);
}

TEST_CASE("experiments are seeded end to end") {
  SyntheticSpec spec;
  spec.users = 30;
  spec.items = 20;
  spec.tags = 12;
  spec.groups = 3;
  spec.tags_per_item = 2;
  spec.latent_dim = 4;
  spec.interactions_per_user = 10;
  spec.seed = 7;
  const auto dataset = generate_synthetic(spec);

  ExperimentConfig config;
  config.d = 4;
  config.repetitions = 2;
  config.base_seed = 5;
  config.train.epochs_max = 3;
  config.train.threads = 1;

  const auto report =
      run_experiment(dataset, ModelVariant::kMf, SplitKind::kWarm, config);
  CHECK(report.model == "mf");
  CHECK(report.dataset == "synthetic");
  REQUIRE(report.aucs.size() == 2);
  for (double a : report.aucs) {
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
  const auto repeat =
      run_experiment(dataset, ModelVariant::kMf, SplitKind::kWarm, config);
  CHECK(repeat.aucs == report.aucs);

  config.repetitions = 1;
  config.d = 3;
  const auto lsi = run_experiment(dataset, ModelVariant::kLsiLr,
                                  SplitKind::kColdItem, config);
  REQUIRE(lsi.aucs.size() == 1);
  CHECK(std::isfinite(lsi.aucs[0]));
  CHECK(lsi.aucs[0] >= 0.0);
  CHECK(lsi.aucs[0] <= 1.0);

  config.repetitions = 0;
  CHECK_THROWS_AS(
      run_experiment(dataset, ModelVariant::kMf, SplitKind::kWarm, config),
      ValidationError);
}

TEST_CASE("report tables have a fixed tab layout") {
  ExperimentReport report;
  report.model = "mf";
  report.dataset = "toy";
  report.split = SplitKind::kWarm;
  report.aucs = {0.5, 0.75};
  CHECK(report.mean() == doctest::Approx(0.625));
  CHECK(report.stddev() == doctest::Approx(std::sqrt(0.03125)));

  std::ostringstream out;
  write_report_table({report}, out);
  CHECK(out.str() ==
        "model\tdataset\tsplit\tmean_auc\tstd_auc\taucs\n"
        "mf\ttoy\twarm\t0.625\t0.176777\t0.5,0.75\n");

  ExperimentReport empty;
  CHECK(empty.mean() == 0.0);
  CHECK(empty.stddev() == 0.0);
  ExperimentReport single;
  single.aucs = {0.7};
  CHECK(single.stddev() == 0.0);
}

TEST_CASE("dimension sweeps validate their grid") {
  SyntheticSpec spec;
  spec.users = 20;
  spec.items = 15;
  spec.tags = 9;
  spec.groups = 3;
  spec.tags_per_item = 2;
  spec.latent_dim = 4;
  spec.interactions_per_user = 8;
  spec.seed = 11;
  const auto dataset = generate_synthetic(spec);

  ExperimentConfig config;
  config.repetitions = 1;
  config.train.epochs_max = 2;
  config.train.threads = 1;

  const auto rows = dimension_sweep(dataset, {ModelVariant::kMf}, {2, 4},
                                    SplitKind::kWarm, config);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].model == "mf");
  CHECK(rows[0].d == 2);
  CHECK(rows[1].d == 4);

  CHECK_THROWS_AS(dimension_sweep(dataset, {ModelVariant::kMf}, {},
                                  SplitKind::kWarm, config),
                  ValidationError);
  CHECK_THROWS_AS(dimension_sweep(dataset, {ModelVariant::kMf}, {0, 2},
                                  SplitKind::kWarm, config),
                  ValidationError);
  CHECK_THROWS_AS(dimension_sweep(dataset, {ModelVariant::kMf}, {4, 2},
                                  SplitKind::kWarm, config),
                  ValidationError);

  std::ostringstream out;
  write_sweep_table({{"mf", 2, 0.5}}, out);
  CHECK(out.str() == "model\td\tmean_auc\nmf\t2\t0.5\n");
}
