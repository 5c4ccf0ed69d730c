#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hybridfm/feature_mapping.hpp"

namespace hybridfm {

// Predictions are clamped to [kProbabilityFloor, 1 - kProbabilityFloor] so
// that log terms stay finite.
inline constexpr double kProbabilityFloor = 1e-12;

// An entity's latent vector and bias: the sums over its features.
struct Representation {
  std::vector<float> latent;
  double bias = 0.0;
};

// Parameter tables of the feature-embedding model plus the Adagrad
// squared-gradient accumulators required to resume training. All tables are
// float32; accumulators start at 1.0 so the first step uses the base
// learning rate.
struct ModelState {
  std::uint32_t d = 0;
  std::vector<float> user_embeddings;      // |F_U| x d, row-major
  std::vector<float> item_embeddings;      // |F_I| x d, row-major
  std::vector<float> user_biases;          // |F_U|
  std::vector<float> item_biases;          // |F_I|
  std::vector<float> user_embedding_acc;   // same shape as user_embeddings
  std::vector<float> item_embedding_acc;
  std::vector<float> user_bias_acc;
  std::vector<float> item_bias_acc;
  std::uint64_t epoch_counter = 0;

  ModelState() = default;
  // All parameters zero, accumulators 1.0.
  ModelState(std::uint32_t dimension, std::size_t n_user_features,
             std::size_t n_item_features);

  std::size_t user_feature_count() const {
    return user_biases.size();
  }
  std::size_t item_feature_count() const {
    return item_biases.size();
  }
  // Total scalar parameter count: (|F_U| + |F_I|) * (d + 1).
  std::size_t parameter_count() const;

  std::span<float> embedding_row(Side side, std::uint32_t feature);
  std::span<const float> embedding_row(Side side, std::uint32_t feature) const;

  bool all_finite() const;
};

// Draws embeddings uniformly from [-0.5/d, +0.5/d]; biases stay zero.
// Small-magnitude starts keep initial scores near zero, so fresh features
// contribute almost nothing to predictions.
void initialize_embeddings(ModelState& model, std::uint64_t seed);

// Numerically stable sigmoid (branch on sign, no exp overflow).
double sigmoid(double x);

// Sum of the chosen side's embedding rows and bias entries.
// Throws ValidationError on an empty feature set, std::out_of_range on an
// out-of-range index.
Representation combine_features(const ModelState& model, Side side,
                                std::span<const std::uint32_t> features);

// sigmoid(q_u . p_i + b_u + b_i), clamped inside (0, 1).
double predict(const ModelState& model,
               std::span<const std::uint32_t> user_features,
               std::span<const std::uint32_t> item_features);

double predict(const ModelState& model, const FeatureMapping& mapping,
               std::uint32_t user, std::uint32_t item);

}  // namespace hybridfm
