#include "hybridfm/metrics.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <vector>

#include "hybridfm/errors.hpp"

namespace hybridfm {

std::optional<double> user_auc(std::span<const double> scores,
                               std::span<const bool> labels) {
  const std::size_t n = scores.size();
  std::size_t positives = 0;
  for (bool l : labels) {
    positives += l ? 1 : 0;
  }
  const std::size_t negatives = n - positives;
  if (positives == 0 || negatives == 0) {
    return std::nullopt;
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  // Rank-sum form of the Mann-Whitney statistic; tied scores share the
  // average of the ranks they occupy.
  double positive_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) {
      ++j;
    }
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        positive_rank_sum += midrank;
      }
    }
    i = j;
  }

  const double p = static_cast<double>(positives);
  const double q = static_cast<double>(negatives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * q);
}

double mean_auc(std::span<const double> scores, const InteractionSet& test) {
  const auto& all = test.all();
  if (scores.size() != all.size()) {
    throw ValidationError("score count does not match interaction count");
  }

  std::map<std::uint32_t, std::vector<std::size_t>> by_user;
  for (std::size_t k = 0; k < all.size(); ++k) {
    by_user[all[k].user].push_back(k);
  }

  double total = 0.0;
  std::size_t counted = 0;
  std::vector<double> user_scores;
  std::unique_ptr<bool[]> user_labels;
  for (const auto& [user, indices] : by_user) {
    user_scores.resize(indices.size());
    user_labels = std::make_unique<bool[]>(indices.size());
    for (std::size_t i = 0; i < indices.size(); ++i) {
      user_scores[i] = scores[indices[i]];
      user_labels[i] = all[indices[i]].positive;
    }
    const auto auc = user_auc(
        user_scores, std::span<const bool>(user_labels.get(), indices.size()));
    if (auc) {
      total += *auc;
      ++counted;
    }
  }
  if (counted == 0) {
    throw ValidationError(
        "no user has both a positive and a negative test interaction");
  }
  return total / static_cast<double>(counted);
}

}  // namespace hybridfm
