#include "hybridfm/feature_mapping.hpp"

#include <ostream>
#include <stdexcept>

#include "hybridfm/errors.hpp"

namespace hybridfm {

std::uint32_t FeatureDictionary::add(const std::string& name) {
  auto it = index_.find(name);
  if (it != index_.end()) {
    return it->second;
  }
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.push_back(name);
  index_.emplace(name, id);
  return id;
}

std::optional<std::uint32_t> FeatureDictionary::find(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::uint32_t FeatureDictionary::at(const std::string& name) const {
  auto found = find(name);
  if (!found) {
    throw std::out_of_range("unknown feature name: " + name);
  }
  return *found;
}

const std::string& FeatureDictionary::name(std::uint32_t index) const {
  if (index >= names_.size()) {
    throw std::out_of_range("feature index out of range: " +
                            std::to_string(index));
  }
  return names_[index];
}

const std::vector<std::uint32_t>& FeatureMapping::features_of(
    Side side, std::uint32_t id) const {
  const auto& sets = side == Side::kUser ? user_feature_sets : item_feature_sets;
  if (id >= sets.size()) {
    throw std::out_of_range("unknown entity id: " + std::to_string(id));
  }
  return sets[id];
}

namespace {

void validate_side(const FeatureDictionary& dict,
                   const std::vector<std::vector<std::uint32_t>>& sets,
                   const char* label) {
  for (std::uint32_t i = 0; i < dict.size(); ++i) {
    if (dict.at(dict.name(i)) != i) {
      throw ValidationError(std::string(label) +
                            " feature dictionary is not a bijection");
    }
  }
  for (std::size_t entity = 0; entity < sets.size(); ++entity) {
    if (sets[entity].empty()) {
      throw ValidationError(std::string(label) + " entity " +
                            std::to_string(entity) + " has no features");
    }
    for (auto f : sets[entity]) {
      if (f >= dict.size()) {
        throw ValidationError(std::string(label) + " entity " +
                              std::to_string(entity) +
                              " references feature index out of range");
      }
    }
  }
}

}  // namespace

void FeatureMapping::validate() const {
  validate_side(user_features, user_feature_sets, "user");
  validate_side(item_features, item_feature_sets, "item");
}

void FeatureMapping::dump_features(Side side, std::ostream& out) const {
  const auto& dict = dictionary(side);
  for (std::uint32_t i = 0; i < dict.size(); ++i) {
    out << i << '\t' << dict.name(i) << '\n';
  }
}

}  // namespace hybridfm
