#include "hybridfm/splits.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "hybridfm/errors.hpp"
#include "hybridfm/rng.hpp"

namespace hybridfm {

namespace {

void check_fraction(double fraction, const char* what) {
  if (!(fraction >= 0.0) || fraction >= 1.0) {
    throw ValidationError(std::string(what) + " must lie in [0, 1)");
  }
}

// Moves `k` pairs out of `pool` in a seeded shuffled order, never taking a
// pair whose removal would leave its user or item without a remaining pair.
// `pool` keeps the rest. Throws when fewer than `k` pairs are extractable.
std::vector<Interaction> carve(std::vector<Interaction>& pool, std::size_t k,
                               std::uint64_t seed) {
  std::unordered_map<std::uint32_t, std::size_t> user_left;
  std::unordered_map<std::uint32_t, std::size_t> item_left;
  for (const auto& t : pool) {
    ++user_left[t.user];
    ++item_left[t.item];
  }

  std::vector<std::uint32_t> order(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) {
    order[i] = static_cast<std::uint32_t>(i);
  }
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<bool> taken(pool.size(), false);
  std::vector<Interaction> extracted;
  extracted.reserve(k);
  for (auto idx : order) {
    if (extracted.size() == k) {
      break;
    }
    const auto& t = pool[idx];
    if (user_left[t.user] <= 1 || item_left[t.item] <= 1) {
      continue;
    }
    --user_left[t.user];
    --item_left[t.item];
    taken[idx] = true;
    extracted.push_back(t);
  }
  if (extracted.size() < k) {
    throw ValidationError(
        "cannot sample the requested fraction while keeping every user and "
        "item in training");
  }

  std::vector<Interaction> kept;
  kept.reserve(pool.size() - k);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (!taken[i]) {
      kept.push_back(pool[i]);
    }
  }
  pool = std::move(kept);
  return extracted;
}

InteractionSet to_set(const std::vector<Interaction>& pairs) {
  InteractionSet out;
  for (const auto& t : pairs) {
    out.add(t.user, t.item, t.positive);
  }
  return out;
}

}  // namespace

std::string split_kind_name(SplitKind kind) {
  return kind == SplitKind::kWarm ? "warm" : "cold";
}

SplitKind parse_split_kind(const std::string& name) {
  if (name == "warm") {
    return SplitKind::kWarm;
  }
  if (name == "cold") {
    return SplitKind::kColdItem;
  }
  throw ValidationError("unknown split kind: " + name +
                        " (expected warm or cold)");
}

DatasetSplit warm_split(const InteractionSet& data, double test_fraction,
                        double validation_fraction, std::uint64_t seed) {
  check_fraction(test_fraction, "test fraction");
  check_fraction(validation_fraction, "validation fraction");
  if (data.empty()) {
    throw ValidationError("cannot split an empty interaction set");
  }

  std::vector<Interaction> pool = data.all();
  const auto k_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(pool.size())));
  const auto test_pairs = carve(pool, k_test, mix_seed(seed, 0));
  const auto k_val = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(pool.size())));
  const auto val_pairs = carve(pool, k_val, mix_seed(seed, 1));

  DatasetSplit split;
  split.kind = SplitKind::kWarm;
  split.seed = seed;
  split.train = to_set(pool);
  split.validation = to_set(val_pairs);
  split.test = to_set(test_pairs);
  return split;
}

DatasetSplit cold_item_split(const InteractionSet& data, double item_fraction,
                             double validation_fraction, std::uint64_t seed) {
  check_fraction(item_fraction, "item fraction");
  check_fraction(validation_fraction, "validation fraction");
  if (data.empty()) {
    throw ValidationError("cannot split an empty interaction set");
  }

  std::unordered_set<std::uint32_t> seen;
  std::vector<std::uint32_t> items;
  for (const auto& t : data.all()) {
    if (seen.insert(t.item).second) {
      items.push_back(t.item);
    }
  }
  std::sort(items.begin(), items.end());

  const auto k_items = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(
             item_fraction * static_cast<double>(items.size()))));
  if (k_items >= items.size()) {
    throw ValidationError("cold split would remove every item from training");
  }
  Rng rng(mix_seed(seed, 0));
  rng.shuffle(items);
  const std::unordered_set<std::uint32_t> held_out(items.begin(),
                                                   items.begin() + k_items);

  std::vector<Interaction> pool;
  std::vector<Interaction> test_pairs;
  for (const auto& t : data.all()) {
    (held_out.contains(t.item) ? test_pairs : pool).push_back(t);
  }
  const auto k_val = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(pool.size())));
  const auto val_pairs = carve(pool, k_val, mix_seed(seed, 1));

  DatasetSplit split;
  split.kind = SplitKind::kColdItem;
  split.seed = seed;
  split.train = to_set(pool);
  split.validation = to_set(val_pairs);
  split.test = to_set(test_pairs);
  return split;
}

}  // namespace hybridfm
