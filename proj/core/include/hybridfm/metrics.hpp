#pragma once

#include <optional>
#include <span>

#include "hybridfm/interactions.hpp"

namespace hybridfm {

// Mann-Whitney AUC for one user's scored test items: the probability that a
// random positive scores above a random negative, ties counted 0.5.
// Returns nullopt when the user lacks one of the classes.
std::optional<double> user_auc(std::span<const double> scores,
                               std::span<const bool> labels);

// Unweighted mean of per-user AUC over users with at least one positive and
// one negative in `test`. `scores[k]` scores `test.all()[k]`. Throws
// ValidationError when sizes differ or no user qualifies.
double mean_auc(std::span<const double> scores, const InteractionSet& test);

}  // namespace hybridfm
