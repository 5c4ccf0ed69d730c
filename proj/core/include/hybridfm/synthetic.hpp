#pragma once

#include <cstdint>
#include <string>

#include "hybridfm/dataset.hpp"

namespace hybridfm {

// Planted-structure fixture: tags come in groups with similar latent
// vectors, every item carries `tags_per_item` tags from a single group, and
// labels follow the planted user/item scores (thresholded at each user's
// median so both classes are present). Metadata fully determines preference,
// which makes cold-start items learnable from tags alone.
struct SyntheticSpec {
  std::size_t users = 2000;
  std::size_t items = 500;
  std::size_t tags = 50;
  std::size_t groups = 5;
  std::uint32_t tags_per_item = 3;
  std::uint32_t latent_dim = 8;
  std::uint32_t interactions_per_user = 20;
  double noise = 0.0;  // label flip probability
  std::uint64_t seed = 42;
};

// Tag names carry their planted group: "tag_g<group>_<index>".
std::string synthetic_tag_name(std::size_t group, std::size_t index);
std::size_t synthetic_tag_group(const std::string& tag_name);

Dataset generate_synthetic(const SyntheticSpec& spec);

// Parses "users=2000,items=500,tags=50,..." into a spec; unknown keys are a
// ValidationError. Keys: users, items, tags, groups, tags_per_item,
// latent_dim, per_user, noise, seed.
SyntheticSpec parse_synthetic_spec(const std::string& text);

}  // namespace hybridfm
