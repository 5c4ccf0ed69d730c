#include "hybridfm/interactions.hpp"

#include <string>

#include "hybridfm/errors.hpp"

namespace hybridfm {

bool InteractionSet::add(std::uint32_t user, std::uint32_t item, bool positive) {
  auto [it, inserted] = labels_.try_emplace(key(user, item), positive);
  if (!inserted) {
    if (it->second != positive) {
      throw ValidationError("conflicting labels for pair (" +
                            std::to_string(user) + ", " +
                            std::to_string(item) + ")");
    }
    return false;
  }
  triples_.push_back({user, item, positive});
  if (positive) {
    ++positive_count_;
  }
  return true;
}

bool InteractionSet::contains(std::uint32_t user, std::uint32_t item) const {
  return labels_.find(key(user, item)) != labels_.end();
}

std::vector<Interaction> InteractionSet::positives() const {
  std::vector<Interaction> out;
  out.reserve(positive_count_);
  for (const auto& t : triples_) {
    if (t.positive) {
      out.push_back(t);
    }
  }
  return out;
}

std::vector<Interaction> InteractionSet::negatives() const {
  std::vector<Interaction> out;
  out.reserve(triples_.size() - positive_count_);
  for (const auto& t : triples_) {
    if (!t.positive) {
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace hybridfm
