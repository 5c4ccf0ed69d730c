#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hybridfm/interactions.hpp"
#include "hybridfm/model.hpp"

namespace hybridfm {

struct TrainConfig {
  double learning_rate = 0.05;
  std::uint32_t epochs_max = 100;
  std::uint32_t threads = 4;
  std::uint32_t early_stop_patience = 3;
  std::uint64_t rng_seed = 42;
};

struct EpochStats {
  std::uint64_t epoch = 0;
  double log_likelihood = 0.0;
  double validation_auc = 0.0;
};

struct TrainingHistory {
  std::vector<EpochStats> epochs;
  std::uint64_t best_epoch = 0;
  double best_validation_auc = 0.0;

  // Tab-delimited table: epoch, loglik, val_auc.
  void write_tsv(std::ostream& out) const;
};

// Stop after `patience` consecutive observations without strict improvement;
// remembers which observation was best.
class EarlyStopper {
 public:
  explicit EarlyStopper(std::uint32_t patience) : patience_(patience) {}

  // Feeds the next validation score; returns true when training should stop.
  bool observe(double score);

  std::size_t best_index() const { return best_index_; }
  double best_score() const { return best_score_; }

 private:
  std::uint32_t patience_;
  std::size_t seen_ = 0;
  std::size_t best_index_ = 0;
  double best_score_ = -1.0;
  std::uint32_t streak_ = 0;
};

// Joint log-likelihood: sum of log r for positives and log(1 - r) for
// negatives, each log term floored at log(1e-12).
double log_likelihood(const ModelState& model, const FeatureMapping& mapping,
                      const InteractionSet& data);

// One stochastic step. With y in {1,0} and g = r - y, every user-feature
// embedding row receives gradient g * p_i, every item-feature row g * q_u,
// and every touched bias g (the sigmoid/log-likelihood identity
// d(-logL)/dscore = r - y). Each scalar updates by -lr/sqrt(G) times its
// gradient, after which G accumulates the squared gradient.
void sgd_step(ModelState& model, const FeatureMapping& mapping,
              const Interaction& interaction, const TrainConfig& config);

// The seeded permutation in which an epoch visits interactions.
std::vector<std::uint32_t> epoch_visit_order(std::uint64_t seed,
                                             std::uint64_t epoch,
                                             std::size_t count);

// Visits every interaction exactly once in a seeded shuffled order. With
// threads == 1 the result is bit-reproducible for a fixed seed. With more
// threads the permutation is sharded across workers that update shared
// parameters without locks; lost updates are tolerated (Hogwild contract).
void train_epoch(ModelState& model, const FeatureMapping& mapping,
                 const InteractionSet& data, const TrainConfig& config);

// Runs epochs until the validation mean-AUC stops improving for
// `early_stop_patience` consecutive epochs (or epochs_max). The model is
// left at its best-validation snapshot. Early stopping monitors a held-out
// validation split rather than the test set.
TrainingHistory fit(ModelState& model, const FeatureMapping& mapping,
                    const InteractionSet& train,
                    const InteractionSet& validation,
                    const TrainConfig& config);

// Registers new feature names and appends freshly initialized rows (embedding
// uniform in [-0.5/d, 0.5/d], bias zero, accumulators 1.0 so a new feature
// learns at the full base rate). Pre-existing parameters stay bit-identical.
// Throws ValidationError if a name is already mapped.
void fold_in_features(ModelState& model, FeatureMapping& mapping,
                      const std::vector<std::string>& new_feature_names,
                      Side side, std::uint64_t seed);

}  // namespace hybridfm
