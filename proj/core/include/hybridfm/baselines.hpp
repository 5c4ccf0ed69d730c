#pragma once

#include <cstdint>
#include <vector>

#include "hybridfm/feature_mapping.hpp"
#include "hybridfm/interactions.hpp"
#include "hybridfm/sparse.hpp"
#include "hybridfm/svd.hpp"

namespace hybridfm {

// One indicator feature per user and per item. Training the core model with
// this mapping is the conventional MF model with user/item biases and a
// sigmoid link.
FeatureMapping make_indicator_mapping(std::size_t n_users, std::size_t n_items);

// Content-based baseline: items projected onto the truncated-SVD topics of
// the item-feature matrix, then one regularized logistic regression per user
// in topic space.
struct LsiLrModel {
  std::uint32_t d = 0;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<double> item_topics;  // items x d
  std::vector<double> weights;      // users x d
  std::vector<double> intercepts;   // users

  double score(std::uint32_t user, std::uint32_t item) const;
};

// `l2` is the ridge strength on the per-user weights (intercepts are not
// penalized); needed so that linearly separable users stay bounded.
LsiLrModel train_lsi_lr(const SparseMatrix& item_features,
                        const InteractionSet& train, std::uint32_t d,
                        std::uint64_t seed = 1, double l2 = 1.0);

// Hybrid user-profile baseline: each user row is the sum of the content
// vectors of positively interacted items; rows are L2-normalized and the
// matrix factorized with truncated SVD. Item latents come from projecting
// feature rows onto the feature latents.
struct LsiUpModel {
  std::uint32_t d = 0;
  std::size_t n_users = 0;
  std::size_t n_items = 0;
  std::vector<double> user_latents;     // users x d (left factors scaled by singular values)
  std::vector<double> feature_latents;  // features x d (right factors)
  std::vector<double> item_latents;     // items x d

  double score(std::uint32_t user, std::uint32_t item) const;
};

LsiUpModel train_lsi_up(const SparseMatrix& item_features,
                        const InteractionSet& train, std::size_t n_users,
                        std::uint32_t d, std::uint64_t seed = 1);

}  // namespace hybridfm
