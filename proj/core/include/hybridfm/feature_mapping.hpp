#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace hybridfm {

enum class Side { kUser, kItem };

// Bidirectional correspondence between feature names and dense indices for
// one side of the model.
class FeatureDictionary {
 public:
  // Returns the feature's index, registering the name if it is new.
  std::uint32_t add(const std::string& name);

  std::optional<std::uint32_t> find(const std::string& name) const;
  bool contains(const std::string& name) const { return find(name).has_value(); }

  // Throws std::out_of_range for an unknown name/index.
  std::uint32_t at(const std::string& name) const;
  const std::string& name(std::uint32_t index) const;

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t> index_;
};

// Feature dictionaries for both sides plus the per-entity feature
// assignments f_u and f_i. Entities (users, items) are dense integer ids.
struct FeatureMapping {
  FeatureDictionary user_features;
  FeatureDictionary item_features;
  std::vector<std::vector<std::uint32_t>> user_feature_sets;
  std::vector<std::vector<std::uint32_t>> item_feature_sets;

  std::size_t user_count() const { return user_feature_sets.size(); }
  std::size_t item_count() const { return item_feature_sets.size(); }

  const FeatureDictionary& dictionary(Side side) const {
    return side == Side::kUser ? user_features : item_features;
  }
  FeatureDictionary& dictionary(Side side) {
    return side == Side::kUser ? user_features : item_features;
  }

  // Feature set of an entity; throws std::out_of_range for an unknown id.
  const std::vector<std::uint32_t>& features_of(Side side, std::uint32_t id) const;

  // Checks the name<->index bijection and that every entity has a non-empty
  // in-range feature set. Throws ValidationError on the first violation.
  void validate() const;

  // One `index<TAB>name` line per feature, for inspection.
  void dump_features(Side side, std::ostream& out) const;
};

}  // namespace hybridfm
