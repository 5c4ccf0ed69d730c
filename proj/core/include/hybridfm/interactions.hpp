#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

namespace hybridfm {

struct Interaction {
  std::uint32_t user = 0;
  std::uint32_t item = 0;
  bool positive = false;
};

// Labelled (user, item) pairs. The positive subset is S+, the negative
// subset S-. A pair may not appear with conflicting labels; re-adding a pair
// with the same label is a no-op.
class InteractionSet {
 public:
  // Returns true if the pair was newly inserted. Throws ValidationError if
  // the pair is already present with the opposite label.
  bool add(std::uint32_t user, std::uint32_t item, bool positive);

  bool contains(std::uint32_t user, std::uint32_t item) const;

  const std::vector<Interaction>& all() const { return triples_; }
  std::size_t size() const { return triples_.size(); }
  bool empty() const { return triples_.empty(); }

  std::size_t positive_count() const { return positive_count_; }
  std::size_t negative_count() const { return triples_.size() - positive_count_; }

  std::vector<Interaction> positives() const;
  std::vector<Interaction> negatives() const;

 private:
  static std::uint64_t key(std::uint32_t user, std::uint32_t item) {
    return (static_cast<std::uint64_t>(user) << 32) | item;
  }

  std::vector<Interaction> triples_;
  std::unordered_map<std::uint64_t, bool> labels_;
  std::size_t positive_count_ = 0;
};

}  // namespace hybridfm
