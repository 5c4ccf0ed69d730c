#include "hybridfm/trainer.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

#include "hybridfm/errors.hpp"
#include "hybridfm/metrics.hpp"
#include "hybridfm/rng.hpp"

namespace hybridfm {

namespace {

// Shared-table access for lock-free multi-threaded updates. Relaxed atomics
// on float compile to plain loads/stores; they only pin down the semantics
// of racing writers.
float racy_load(const float& slot) {
  return std::atomic_ref<const float>(slot).load(std::memory_order_relaxed);
}

void racy_store(float& slot, float value) {
  std::atomic_ref<float>(slot).store(value, std::memory_order_relaxed);
}

// theta -= lr/sqrt(G) * grad, then G += grad^2.
void adagrad_update(float& slot, float& acc_slot, double learning_rate,
                    double grad) {
  const double theta = racy_load(slot);
  const double acc = racy_load(acc_slot);
  racy_store(slot,
             static_cast<float>(theta - learning_rate / std::sqrt(acc) * grad));
  racy_store(acc_slot, static_cast<float>(acc + grad * grad));
}

}  // namespace

bool EarlyStopper::observe(double score) {
  const std::size_t index = seen_++;
  if (score > best_score_) {
    best_score_ = score;
    best_index_ = index;
    streak_ = 0;
    return false;
  }
  ++streak_;
  return streak_ >= patience_;
}

double log_likelihood(const ModelState& model, const FeatureMapping& mapping,
                      const InteractionSet& data) {
  double total = 0.0;
  for (const auto& t : data.all()) {
    const double r = predict(model, mapping, t.user, t.item);
    total += t.positive ? std::log(r) : std::log(1.0 - r);
  }
  return total;
}

void sgd_step(ModelState& model, const FeatureMapping& mapping,
              const Interaction& interaction, const TrainConfig& config) {
  const auto& user_features = mapping.features_of(Side::kUser, interaction.user);
  const auto& item_features = mapping.features_of(Side::kItem, interaction.item);
  const std::uint32_t d = model.d;

  thread_local std::vector<double> q;
  thread_local std::vector<double> p;
  q.assign(d, 0.0);
  p.assign(d, 0.0);

  double bias_sum = 0.0;
  for (auto f : user_features) {
    const float* row = model.user_embeddings.data() +
                       static_cast<std::size_t>(f) * d;
    for (std::uint32_t k = 0; k < d; ++k) {
      q[k] += racy_load(row[k]);
    }
    bias_sum += racy_load(model.user_biases[f]);
  }
  for (auto f : item_features) {
    const float* row = model.item_embeddings.data() +
                       static_cast<std::size_t>(f) * d;
    for (std::uint32_t k = 0; k < d; ++k) {
      p[k] += racy_load(row[k]);
    }
    bias_sum += racy_load(model.item_biases[f]);
  }

  double score = bias_sum;
  for (std::uint32_t k = 0; k < d; ++k) {
    score += q[k] * p[k];
  }
  const double g = sigmoid(score) - (interaction.positive ? 1.0 : 0.0);
  const double lr = config.learning_rate;

  // Both sides use the representations gathered above, so the item update
  // sees the user's pre-step q and vice versa.
  for (auto f : user_features) {
    const std::size_t base = static_cast<std::size_t>(f) * d;
    for (std::uint32_t k = 0; k < d; ++k) {
      adagrad_update(model.user_embeddings[base + k],
                     model.user_embedding_acc[base + k], lr, g * p[k]);
    }
    adagrad_update(model.user_biases[f], model.user_bias_acc[f], lr, g);
  }
  for (auto f : item_features) {
    const std::size_t base = static_cast<std::size_t>(f) * d;
    for (std::uint32_t k = 0; k < d; ++k) {
      adagrad_update(model.item_embeddings[base + k],
                     model.item_embedding_acc[base + k], lr, g * q[k]);
    }
    adagrad_update(model.item_biases[f], model.item_bias_acc[f], lr, g);
  }
}

std::vector<std::uint32_t> epoch_visit_order(std::uint64_t seed,
                                             std::uint64_t epoch,
                                             std::size_t count) {
  std::vector<std::uint32_t> order(count);
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(mix_seed(seed, epoch));
  rng.shuffle(order);
  return order;
}

void train_epoch(ModelState& model, const FeatureMapping& mapping,
                 const InteractionSet& data, const TrainConfig& config) {
  const auto order =
      epoch_visit_order(config.rng_seed, model.epoch_counter, data.size());
  const auto& all = data.all();

  const std::size_t n_threads =
      std::max<std::size_t>(1, std::min<std::size_t>(config.threads, order.size()));
  if (n_threads == 1) {
    for (auto idx : order) {
      sgd_step(model, mapping, all[idx], config);
    }
  } else {
    const std::size_t chunk = (order.size() + n_threads - 1) / n_threads;
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (std::size_t t = 0; t < n_threads; ++t) {
      const std::size_t begin = t * chunk;
      const std::size_t end = std::min(order.size(), begin + chunk);
      workers.emplace_back([&, begin, end] {
        for (std::size_t i = begin; i < end; ++i) {
          sgd_step(model, mapping, all[order[i]], config);
        }
      });
    }
    for (auto& w : workers) {
      w.join();
    }
  }
  ++model.epoch_counter;
}

namespace {

double validation_mean_auc(const ModelState& model,
                           const FeatureMapping& mapping,
                           const InteractionSet& validation) {
  std::vector<double> scores;
  scores.reserve(validation.size());
  for (const auto& t : validation.all()) {
    scores.push_back(predict(model, mapping, t.user, t.item));
  }
  return mean_auc(scores, validation);
}

}  // namespace

TrainingHistory fit(ModelState& model, const FeatureMapping& mapping,
                    const InteractionSet& train,
                    const InteractionSet& validation,
                    const TrainConfig& config) {
  for (const auto& t : validation.all()) {
    if (train.contains(t.user, t.item)) {
      throw ValidationError("validation interaction also present in train");
    }
  }

  const bool monitor = !validation.empty() && config.early_stop_patience > 0;
  EarlyStopper stopper(config.early_stop_patience);
  TrainingHistory history;
  ModelState best;
  bool have_best = false;

  for (std::uint32_t e = 0; e < config.epochs_max; ++e) {
    train_epoch(model, mapping, train, config);
    EpochStats stats;
    stats.epoch = model.epoch_counter;
    stats.log_likelihood = log_likelihood(model, mapping, train);
    stats.validation_auc = validation.empty()
                               ? std::numeric_limits<double>::quiet_NaN()
                               : validation_mean_auc(model, mapping, validation);
    history.epochs.push_back(stats);

    if (monitor) {
      const double previous_best = stopper.best_score();
      const bool stop = stopper.observe(stats.validation_auc);
      if (stats.validation_auc > previous_best) {
        best = model;
        have_best = true;
      }
      if (stop) {
        break;
      }
    }
  }

  if (have_best) {
    model = best;
    history.best_epoch = history.epochs[stopper.best_index()].epoch;
    history.best_validation_auc = stopper.best_score();
  } else if (!history.epochs.empty()) {
    history.best_epoch = history.epochs.back().epoch;
    history.best_validation_auc = history.epochs.back().validation_auc;
  }
  return history;
}

void TrainingHistory::write_tsv(std::ostream& out) const {
  out << "epoch\tlog_likelihood\tvalidation_auc\n";
  for (const auto& s : epochs) {
    out << s.epoch << '\t' << s.log_likelihood << '\t' << s.validation_auc
        << '\n';
  }
}

void fold_in_features(ModelState& model, FeatureMapping& mapping,
                      const std::vector<std::string>& new_feature_names,
                      Side side, std::uint64_t seed) {
  auto& dict = mapping.dictionary(side);
  for (const auto& name : new_feature_names) {
    if (dict.find(name)) {
      throw ValidationError("feature already mapped: " + name);
    }
  }

  auto& embeddings =
      side == Side::kUser ? model.user_embeddings : model.item_embeddings;
  auto& embedding_acc =
      side == Side::kUser ? model.user_embedding_acc : model.item_embedding_acc;
  auto& biases = side == Side::kUser ? model.user_biases : model.item_biases;
  auto& bias_acc =
      side == Side::kUser ? model.user_bias_acc : model.item_bias_acc;

  const double bound = 0.5 / model.d;
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(side)));
  for (const auto& name : new_feature_names) {
    dict.add(name);
    for (std::uint32_t k = 0; k < model.d; ++k) {
      embeddings.push_back(static_cast<float>(rng.uniform(-bound, bound)));
      embedding_acc.push_back(1.0f);
    }
    biases.push_back(0.0f);
    bias_acc.push_back(1.0f);
  }
}

}  // namespace hybridfm
