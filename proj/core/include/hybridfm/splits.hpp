#pragma once

#include <cstdint>
#include <string>

#include "hybridfm/interactions.hpp"

namespace hybridfm {

enum class SplitKind { kWarm, kColdItem };

std::string split_kind_name(SplitKind kind);
SplitKind parse_split_kind(const std::string& name);

struct DatasetSplit {
  InteractionSet train;
  InteractionSet validation;
  InteractionSet test;
  SplitKind kind = SplitKind::kWarm;
  std::uint64_t seed = 0;
};

// Samples `test_fraction` of pairs into test such that every user and item
// keeps at least one training interaction (pairs whose removal would strand
// an entity are passed over and the next shuffled pair is drawn instead).
// A further `validation_fraction` of the remaining pairs is carved out the
// same way for early stopping. Throws ValidationError when the constraint
// cannot be met.
DatasetSplit warm_split(const InteractionSet& data, double test_fraction = 0.2,
                        double validation_fraction = 0.1,
                        std::uint64_t seed = 42);

// Picks `item_fraction` of the interacted items uniformly; all their
// interactions form the test set, so no test item is seen in training.
// Validation is carved warm-style from the remaining training pairs.
DatasetSplit cold_item_split(const InteractionSet& data,
                             double item_fraction = 0.2,
                             double validation_fraction = 0.1,
                             std::uint64_t seed = 42);

}  // namespace hybridfm
