#include "hybridfm/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hybridfm/errors.hpp"
#include "hybridfm/rng.hpp"

namespace hybridfm {

ModelState::ModelState(std::uint32_t dimension, std::size_t n_user_features,
                       std::size_t n_item_features)
    : d(dimension),
      user_embeddings(n_user_features * dimension, 0.0f),
      item_embeddings(n_item_features * dimension, 0.0f),
      user_biases(n_user_features, 0.0f),
      item_biases(n_item_features, 0.0f),
      user_embedding_acc(n_user_features * dimension, 1.0f),
      item_embedding_acc(n_item_features * dimension, 1.0f),
      user_bias_acc(n_user_features, 1.0f),
      item_bias_acc(n_item_features, 1.0f) {
  if (dimension == 0) {
    throw ValidationError("latent dimensionality must be positive");
  }
}

std::size_t ModelState::parameter_count() const {
  return user_embeddings.size() + item_embeddings.size() +
         user_biases.size() + item_biases.size();
}

std::span<float> ModelState::embedding_row(Side side, std::uint32_t feature) {
  auto& table = side == Side::kUser ? user_embeddings : item_embeddings;
  return {table.data() + static_cast<std::size_t>(feature) * d, d};
}

std::span<const float> ModelState::embedding_row(Side side,
                                                 std::uint32_t feature) const {
  const auto& table = side == Side::kUser ? user_embeddings : item_embeddings;
  return {table.data() + static_cast<std::size_t>(feature) * d, d};
}

bool ModelState::all_finite() const {
  auto finite = [](const std::vector<float>& v) {
    return std::all_of(v.begin(), v.end(),
                       [](float x) { return std::isfinite(x); });
  };
  return finite(user_embeddings) && finite(item_embeddings) &&
         finite(user_biases) && finite(item_biases);
}

void initialize_embeddings(ModelState& model, std::uint64_t seed) {
  Rng rng(seed);
  const double scale = 0.5 / model.d;
  for (auto& w : model.user_embeddings) {
    w = static_cast<float>(rng.uniform(-scale, scale));
  }
  for (auto& w : model.item_embeddings) {
    w = static_cast<float>(rng.uniform(-scale, scale));
  }
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

namespace {

void check_features(std::size_t table_size,
                    std::span<const std::uint32_t> features) {
  if (features.empty()) {
    throw ValidationError("feature set must be non-empty");
  }
  for (auto f : features) {
    if (f >= table_size) {
      throw std::out_of_range("feature index " + std::to_string(f) +
                              " out of range (" + std::to_string(table_size) +
                              " features)");
    }
  }
}

}  // namespace

Representation combine_features(const ModelState& model, Side side,
                                std::span<const std::uint32_t> features) {
  const std::size_t n = side == Side::kUser ? model.user_feature_count()
                                            : model.item_feature_count();
  check_features(n, features);

  Representation rep;
  rep.latent.assign(model.d, 0.0f);
  const auto& biases = side == Side::kUser ? model.user_biases : model.item_biases;
  for (auto f : features) {
    const auto row = model.embedding_row(side, f);
    for (std::uint32_t t = 0; t < model.d; ++t) {
      rep.latent[t] += row[t];
    }
    rep.bias += biases[f];
  }
  return rep;
}

double predict(const ModelState& model,
               std::span<const std::uint32_t> user_features,
               std::span<const std::uint32_t> item_features) {
  const Representation user = combine_features(model, Side::kUser, user_features);
  const Representation item = combine_features(model, Side::kItem, item_features);
  double score = user.bias + item.bias;
  for (std::uint32_t t = 0; t < model.d; ++t) {
    score += static_cast<double>(user.latent[t]) * item.latent[t];
  }
  const double p = sigmoid(score);
  return std::clamp(p, kProbabilityFloor, 1.0 - kProbabilityFloor);
}

double predict(const ModelState& model, const FeatureMapping& mapping,
               std::uint32_t user, std::uint32_t item) {
  return predict(model, mapping.features_of(Side::kUser, user),
                 mapping.features_of(Side::kItem, item));
}

}  // namespace hybridfm
