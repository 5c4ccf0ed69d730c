#include "hybridfm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "hybridfm/errors.hpp"
#include "hybridfm/rng.hpp"

namespace hybridfm {

std::string synthetic_tag_name(std::size_t group, std::size_t index) {
  return "tag_g" + std::to_string(group) + "_" + std::to_string(index);
}

std::size_t synthetic_tag_group(const std::string& tag_name) {
  if (!tag_name.starts_with("tag_g")) {
    throw ValidationError("not a synthetic tag name: " + tag_name);
  }
  const std::size_t underscore = tag_name.find('_', 5);
  if (underscore == std::string::npos) {
    throw ValidationError("not a synthetic tag name: " + tag_name);
  }
  return std::stoul(tag_name.substr(5, underscore - 5));
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.users == 0 || spec.items == 0 || spec.tags == 0 ||
      spec.groups == 0 || spec.tags_per_item == 0 || spec.latent_dim == 0 ||
      spec.interactions_per_user < 2) {
    throw ValidationError("synthetic spec fields must be positive "
                          "(and at least 2 interactions per user)");
  }
  if (spec.groups > spec.tags) {
    throw ValidationError("more tag groups than tags");
  }
  if (spec.tags_per_item > spec.tags / spec.groups) {
    throw ValidationError("tags_per_item exceeds the smallest group size");
  }
  if (spec.interactions_per_user > spec.items) {
    throw ValidationError("more interactions per user than items");
  }
  if (spec.noise < 0.0 || spec.noise > 0.5) {
    throw ValidationError("noise must lie in [0, 0.5]");
  }

  const std::uint32_t dim = spec.latent_dim;
  Rng rng(mix_seed(spec.seed, 0xf1c));

  // Group centroids on the unit sphere; member tags jitter around them, so
  // tags within a group stay mutually closer than tags across groups.
  std::vector<double> centroids(spec.groups * dim);
  for (std::size_t g = 0; g < spec.groups; ++g) {
    double norm = 0.0;
    for (std::uint32_t k = 0; k < dim; ++k) {
      const double v = rng.normal();
      centroids[g * dim + k] = v;
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (std::uint32_t k = 0; k < dim; ++k) {
      centroids[g * dim + k] /= norm;
    }
  }

  std::vector<double> tag_latents(spec.tags * dim);
  std::vector<std::size_t> tag_group(spec.tags);
  std::vector<std::vector<std::size_t>> group_members(spec.groups);
  for (std::size_t t = 0; t < spec.tags; ++t) {
    const std::size_t g = t % spec.groups;
    tag_group[t] = g;
    group_members[g].push_back(t);
    for (std::uint32_t k = 0; k < dim; ++k) {
      tag_latents[t * dim + k] =
          centroids[g * dim + k] + 0.25 * rng.normal();
    }
  }

  Dataset dataset;
  dataset.name = "synthetic";
  dataset.user_names.reserve(spec.users);
  dataset.item_names.reserve(spec.items);

  // Item latent = mean of its tags' latents; tags drawn from one group.
  std::vector<double> item_latents(spec.items * dim, 0.0);
  dataset.item_metadata.resize(spec.items);
  for (std::size_t i = 0; i < spec.items; ++i) {
    dataset.item_names.push_back("item" + std::to_string(i));
    const std::size_t g = rng.below(spec.groups);
    auto members = group_members[g];
    rng.shuffle(members);
    members.resize(spec.tags_per_item);
    std::sort(members.begin(), members.end());
    for (auto t : members) {
      dataset.item_metadata[i].push_back(
          synthetic_tag_name(tag_group[t], t));
      for (std::uint32_t k = 0; k < dim; ++k) {
        item_latents[i * dim + k] += tag_latents[t * dim + k];
      }
    }
    for (std::uint32_t k = 0; k < dim; ++k) {
      item_latents[i * dim + k] /= spec.tags_per_item;
    }
  }

  dataset.user_metadata.resize(spec.users);
  const double user_scale = 1.0 / std::sqrt(static_cast<double>(dim));
  std::vector<std::uint32_t> item_ids(spec.items);
  for (std::size_t i = 0; i < spec.items; ++i) {
    item_ids[i] = static_cast<std::uint32_t>(i);
  }

  for (std::size_t u = 0; u < spec.users; ++u) {
    dataset.user_names.push_back("user" + std::to_string(u));
    std::vector<double> latent(dim);
    for (std::uint32_t k = 0; k < dim; ++k) {
      latent[k] = rng.normal() * user_scale;
    }

    rng.shuffle(item_ids);
    std::vector<std::pair<double, std::uint32_t>> drawn;
    drawn.reserve(spec.interactions_per_user);
    for (std::uint32_t n = 0; n < spec.interactions_per_user; ++n) {
      const std::uint32_t item = item_ids[n];
      double score = 0.0;
      for (std::uint32_t k = 0; k < dim; ++k) {
        score += latent[k] * item_latents[item * dim + k];
      }
      drawn.emplace_back(score, item);
    }

    // Label against the user's median planted score so both classes appear.
    auto sorted = drawn;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2,
                     sorted.end());
    const double median = sorted[sorted.size() / 2].first;
    for (const auto& [score, item] : drawn) {
      bool positive = score > median;
      if (spec.noise > 0.0 && rng.uniform() < spec.noise) {
        positive = !positive;
      }
      dataset.interactions.add(static_cast<std::uint32_t>(u), item, positive);
    }
  }
  return dataset;
}

SyntheticSpec parse_synthetic_spec(const std::string& text) {
  SyntheticSpec spec;
  if (text.empty()) {
    return spec;
  }
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string::npos) {
      comma = text.size();
    }
    const std::string part = text.substr(start, comma - start);
    start = comma + 1;
    if (part.empty()) {
      continue;
    }
    const std::size_t eq = part.find('=');
    if (eq == std::string::npos) {
      throw ValidationError("expected key=value in synthetic spec: " + part);
    }
    const std::string key = part.substr(0, eq);
    const std::string value = part.substr(eq + 1);
    try {
      if (key == "users") {
        spec.users = std::stoul(value);
      } else if (key == "items") {
        spec.items = std::stoul(value);
      } else if (key == "tags") {
        spec.tags = std::stoul(value);
      } else if (key == "groups") {
        spec.groups = std::stoul(value);
      } else if (key == "tags_per_item") {
        spec.tags_per_item = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "latent_dim") {
        spec.latent_dim = static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "per_user") {
        spec.interactions_per_user =
            static_cast<std::uint32_t>(std::stoul(value));
      } else if (key == "noise") {
        spec.noise = std::stod(value);
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else {
        throw ValidationError("unknown synthetic spec key: " + key);
      }
    } catch (const ValidationError&) {
      throw;
    } catch (const std::exception&) {
      throw ValidationError("bad value for synthetic spec key " + key + ": " +
                            value);
    }
  }
  return spec;
}

}  // namespace hybridfm
