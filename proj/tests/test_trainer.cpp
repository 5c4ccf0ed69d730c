#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <set>
#include <sstream>

#include "hybridfm/baselines.hpp"
#include "hybridfm/errors.hpp"
#include "hybridfm/metrics.hpp"
#include "hybridfm/model.hpp"
#include "hybridfm/rng.hpp"
#include "hybridfm/serialization.hpp"
#include "hybridfm/trainer.hpp"
#include "support/oracles.hpp"

using namespace hybridfm;

namespace {

// Two users sharing a feature, three items with overlapping tag sets.
FeatureMapping overlap_mapping() {
  FeatureMapping m;
  m.user_features.add("u0");
  m.user_features.add("u1");
  m.user_features.add("shared");
  m.item_features.add("t0");
  m.item_features.add("t1");
  m.item_features.add("t2");
  m.user_feature_sets = {{0, 2}, {1, 2}};
  m.item_feature_sets = {{0}, {0, 1}, {1, 2}};
  return m;
}

InteractionSet small_data() {
  InteractionSet s;
  s.add(0, 0, true);
  s.add(0, 1, false);
  s.add(0, 2, true);
  s.add(1, 0, false);
  s.add(1, 1, true);
  s.add(1, 2, false);
  return s;
}

// Random dataset over an indicator mapping, split into train/validation.
struct MfFixture {
  FeatureMapping mapping;
  InteractionSet train;
  InteractionSet validation;
  std::size_t n_users = 20;
  std::size_t n_items = 15;

  explicit MfFixture(std::uint64_t seed) {
    mapping = make_indicator_mapping(n_users, n_items);
    Rng rng(seed);
    for (std::uint32_t u = 0; u < n_users; ++u) {
      // preference by parity, plus noise
      for (std::uint32_t i = 0; i < n_items; ++i) {
        const bool liked = ((u + i) % 2 == 0) != (rng.uniform() < 0.15);
        if (rng.uniform() < 0.7) {
          train.add(u, i, liked);
        } else {
          validation.add(u, i, liked);
        }
      }
    }
  }
};

}  // namespace

TEST_CASE("log likelihood matches the oracle") {
  const auto mapping = overlap_mapping();
  ModelState model(3, 3, 3);
  Rng rng(5);
  for (auto* table : {&model.user_embeddings, &model.item_embeddings,
                      &model.user_biases, &model.item_biases}) {
    for (auto& v : *table) {
      v = static_cast<float>(rng.uniform(-1.5, 1.5));
    }
  }
  const auto data = small_data();
  const double got = log_likelihood(model, mapping, data);
  const double want = oracles::log_likelihood(model, mapping, data);
  // the library combines feature rows in float32, the oracle in double
  CHECK(got == doctest::Approx(want).epsilon(1e-6));
  CHECK(got < 0.0);
}

TEST_CASE("one sgd step follows the adaptive update rule exactly") {
  // Single-feature entities, d = 2, all parameters hand-tracked.
  FeatureMapping mapping;
  mapping.user_features.add("u");
  mapping.item_features.add("i");
  mapping.user_feature_sets = {{0}};
  mapping.item_feature_sets = {{0}};

  ModelState model(2, 1, 1);
  model.user_embeddings = {0.5f, -0.25f};
  model.item_embeddings = {0.125f, 0.75f};
  model.user_biases = {0.0625f};
  model.item_biases = {-0.125f};

  TrainConfig config;
  config.learning_rate = 0.1;

  // forward pass in doubles, matching float storage exactly; same
  // sign-branched sigmoid as the library so the bits line up
  const auto ref_sigmoid = [](double x) {
    if (x >= 0.0) {
      return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
  };
  const double q0 = 0.5, q1 = -0.25, p0 = 0.125, p1 = 0.75;
  const double score = (0.0 + 0.0625 + -0.125) + q0 * p0 + q1 * p1;
  const double g = ref_sigmoid(score) - 1.0;

  sgd_step(model, mapping, {0, 0, true}, config);

  const auto expect = [&](double theta, double grad) {
    return static_cast<float>(theta - 0.1 / std::sqrt(1.0) * grad);
  };
  CHECK(model.user_embeddings[0] == expect(q0, g * p0));
  CHECK(model.user_embeddings[1] == expect(q1, g * p1));
  CHECK(model.user_biases[0] == expect(0.0625, g));
  // item side must use the pre-update user vector
  CHECK(model.item_embeddings[0] == expect(p0, g * q0));
  CHECK(model.item_embeddings[1] == expect(p1, g * q1));
  CHECK(model.item_biases[0] == expect(-0.125, g));
  // accumulators gain the squared gradient after the step
  CHECK(model.user_embedding_acc[0] ==
        static_cast<float>(1.0 + (g * p0) * (g * p0)));
  CHECK(model.user_bias_acc[0] == static_cast<float>(1.0 + g * g));

  // the second step for the same pair divides by the grown accumulator
  const double theta2 = model.user_biases[0];
  const double acc2 = model.user_bias_acc[0];
  const double score2 =
      (0.0 + theta2 + static_cast<double>(model.item_biases[0])) +
      static_cast<double>(model.user_embeddings[0]) *
          static_cast<double>(model.item_embeddings[0]) +
      static_cast<double>(model.user_embeddings[1]) *
          static_cast<double>(model.item_embeddings[1]);
  const double g2 = ref_sigmoid(score2) - 1.0;
  sgd_step(model, mapping, {0, 0, true}, config);
  CHECK(model.user_biases[0] ==
        static_cast<float>(theta2 - 0.1 / std::sqrt(acc2) * g2));
  CHECK(model.user_bias_acc[0] == static_cast<float>(acc2 + g2 * g2));
}

TEST_CASE("gradients match finite differences of the loss") {
  const auto mapping = overlap_mapping();
  ModelState model(3, 3, 3);
  initialize_embeddings(model, 21);
  Rng rng(22);
  for (auto& v : model.user_biases) {
    v = static_cast<float>(rng.uniform(-0.2, 0.2));
  }
  for (auto& v : model.item_biases) {
    v = static_cast<float>(rng.uniform(-0.2, 0.2));
  }

  // -d log L / d score == r - y at a single interaction
  InteractionSet one;
  one.add(0, 1, true);
  const double r = predict(model, mapping, 0, 1);

  const double h = 1e-6;
  auto shifted = model;
  // shift the bias of user feature 0 (participates once): d score / d b = 1
  shifted.user_biases[0] = static_cast<float>(model.user_biases[0] + h);
  const double up = log_likelihood(shifted, mapping, one);
  shifted.user_biases[0] = static_cast<float>(model.user_biases[0] - h);
  const double down = log_likelihood(shifted, mapping, one);
  const double realized_step = static_cast<double>(static_cast<float>(
                                   model.user_biases[0] + h)) -
                               static_cast<double>(static_cast<float>(
                                   model.user_biases[0] - h));
  const double fd = (up - down) / realized_step;
  CHECK(-fd == doctest::Approx(r - 1.0).epsilon(1e-3));
}

TEST_CASE("epoch visit order is a seeded permutation") {
  const auto order = epoch_visit_order(5, 0, 100);
  CHECK(order.size() == 100);
  std::set<std::uint32_t> unique(order.begin(), order.end());
  CHECK(unique.size() == 100);
  CHECK(*unique.rbegin() == 99);

  CHECK(epoch_visit_order(5, 0, 100) == order);
  CHECK(epoch_visit_order(5, 1, 100) != order);
  CHECK(epoch_visit_order(6, 0, 100) != order);
}

TEST_CASE("single-thread training is bit-reproducible") {
  const MfFixture fixture(31);
  TrainConfig config;
  config.threads = 1;
  config.rng_seed = 9;

  ModelState a(4, fixture.n_users, fixture.n_items);
  initialize_embeddings(a, 1);
  ModelState b(4, fixture.n_users, fixture.n_items);
  initialize_embeddings(b, 1);
  for (int e = 0; e < 3; ++e) {
    train_epoch(a, fixture.mapping, fixture.train, config);
    train_epoch(b, fixture.mapping, fixture.train, config);
  }
  CHECK(a.epoch_counter == 3);
  CHECK(std::memcmp(a.user_embeddings.data(), b.user_embeddings.data(),
                    a.user_embeddings.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(a.item_embeddings.data(), b.item_embeddings.data(),
                    a.item_embeddings.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(a.user_bias_acc.data(), b.user_bias_acc.data(),
                    a.user_bias_acc.size() * sizeof(float)) == 0);
}

TEST_CASE("training raises the likelihood; threads keep parameters finite") {
  const MfFixture fixture(32);
  for (const std::uint32_t threads : {1u, 4u}) {
    CAPTURE(threads);
    TrainConfig config;
    config.threads = threads;
    config.rng_seed = 10;
    ModelState model(4, fixture.n_users, fixture.n_items);
    initialize_embeddings(model, 2);
    const double before = log_likelihood(model, fixture.mapping, fixture.train);
    for (int e = 0; e < 10; ++e) {
      train_epoch(model, fixture.mapping, fixture.train, config);
    }
    const double after = log_likelihood(model, fixture.mapping, fixture.train);
    CHECK(model.all_finite());
    CHECK(after > before);
  }
}

TEST_CASE("early stopper keeps the best observation") {
  EarlyStopper stopper(2);
  CHECK_FALSE(stopper.observe(0.6));
  CHECK_FALSE(stopper.observe(0.7));
  CHECK_FALSE(stopper.observe(0.69));  // first miss
  CHECK(stopper.observe(0.68));        // second miss: stop
  CHECK(stopper.best_index() == 1);
  CHECK(stopper.best_score() == doctest::Approx(0.7));

  EarlyStopper reset(2);
  CHECK_FALSE(reset.observe(0.5));
  CHECK_FALSE(reset.observe(0.4));     // one miss
  CHECK_FALSE(reset.observe(0.55));    // improvement resets the streak
  CHECK_FALSE(reset.observe(0.54));
  CHECK(reset.observe(0.53));
  CHECK(reset.best_index() == 2);
}

TEST_CASE("fit restores the best-validation snapshot") {
  const MfFixture fixture(33);
  TrainConfig config;
  config.threads = 1;
  config.epochs_max = 30;
  config.early_stop_patience = 3;
  config.rng_seed = 11;

  ModelState model(4, fixture.n_users, fixture.n_items);
  initialize_embeddings(model, 3);
  const auto history =
      fit(model, fixture.mapping, fixture.train, fixture.validation, config);

  REQUIRE_FALSE(history.epochs.empty());
  double best = -1.0;
  std::uint64_t best_epoch = 0;
  for (const auto& s : history.epochs) {
    if (s.validation_auc > best) {
      best = s.validation_auc;
      best_epoch = s.epoch;
    }
  }
  CHECK(history.best_validation_auc == doctest::Approx(best));
  CHECK(history.best_epoch == best_epoch);

  // the returned model reproduces the best recorded validation AUC
  std::vector<double> scores;
  for (const auto& t : fixture.validation.all()) {
    scores.push_back(predict(model, fixture.mapping, t.user, t.item));
  }
  CHECK(mean_auc(scores, fixture.validation) ==
        doctest::Approx(history.best_validation_auc).epsilon(1e-12));
}

TEST_CASE("fit rejects validation rows that are also in train") {
  const auto mapping = overlap_mapping();
  const auto data = small_data();
  InteractionSet validation;
  validation.add(0, 0, true);  // also in train
  ModelState model(2, 3, 3);
  initialize_embeddings(model, 4);
  TrainConfig config;
  CHECK_THROWS_AS(fit(model, mapping, data, validation, config),
                  ValidationError);
}

TEST_CASE("history table is tab separated") {
  TrainingHistory history;
  history.epochs.push_back({1, -10.5, 0.75});
  history.epochs.push_back({2, -9.25, 0.8125});
  std::ostringstream out;
  history.write_tsv(out);
  CHECK(out.str() ==
        "epoch\tlog_likelihood\tvalidation_auc\n"
        "1\t-10.5\t0.75\n"
        "2\t-9.25\t0.8125\n");
}

TEST_CASE("interrupted training resumes bit-exactly") {
  const MfFixture fixture(34);
  TrainConfig config;
  config.threads = 1;
  config.rng_seed = 12;

  ModelState uninterrupted(4, fixture.n_users, fixture.n_items);
  initialize_embeddings(uninterrupted, 5);
  for (int e = 0; e < 4; ++e) {
    train_epoch(uninterrupted, fixture.mapping, fixture.train, config);
  }

  ModelState first(4, fixture.n_users, fixture.n_items);
  initialize_embeddings(first, 5);
  for (int e = 0; e < 2; ++e) {
    train_epoch(first, fixture.mapping, fixture.train, config);
  }
  std::stringstream buffer;
  save_model(first, fixture.mapping, buffer);
  auto [resumed, resumed_mapping] = load_model(buffer);
  CHECK(resumed.epoch_counter == 2);
  for (int e = 0; e < 2; ++e) {
    train_epoch(resumed, resumed_mapping, fixture.train, config);
  }

  CHECK(resumed.epoch_counter == uninterrupted.epoch_counter);
  CHECK(std::memcmp(resumed.user_embeddings.data(),
                    uninterrupted.user_embeddings.data(),
                    resumed.user_embeddings.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(resumed.item_embeddings.data(),
                    uninterrupted.item_embeddings.data(),
                    resumed.item_embeddings.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(resumed.user_bias_acc.data(),
                    uninterrupted.user_bias_acc.data(),
                    resumed.user_bias_acc.size() * sizeof(float)) == 0);
  CHECK(std::memcmp(resumed.item_bias_acc.data(),
                    uninterrupted.item_bias_acc.data(),
                    resumed.item_bias_acc.size() * sizeof(float)) == 0);
}
