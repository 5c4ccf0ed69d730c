#include "hybridfm/ann.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "hybridfm/errors.hpp"
#include "hybridfm/rng.hpp"

namespace hybridfm {

namespace {

double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

double norm(std::span<const float> v) {
  return std::sqrt(dot(v, v));
}

// Ranks below every true cosine so zero-norm rows land last.
constexpr double kZeroNormSentinel = -2.0;

void sort_neighbors(std::vector<Neighbor>& neighbors) {
  std::sort(neighbors.begin(), neighbors.end(),
            [](const Neighbor& a, const Neighbor& b) {
              return a.similarity != b.similarity
                         ? a.similarity > b.similarity
                         : a.id < b.id;
            });
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine of vectors with different dimensions");
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw ValidationError("cosine of a zero vector is undefined");
  }
  return dot(a, b) / (na * nb);
}

std::vector<Neighbor> top_k_exact(const EmbeddingTableView& table,
                                  std::uint32_t query_id, std::size_t k) {
  if (query_id >= table.count) {
    throw std::out_of_range("query id outside the embedding table");
  }
  if (k >= table.count) {
    throw ValidationError("k must be smaller than the table size");
  }
  const auto q = table.row(query_id);
  const double qn = norm(q);
  if (qn == 0.0) {
    throw ValidationError("query row has zero norm");
  }

  std::vector<Neighbor> neighbors;
  neighbors.reserve(table.count - 1);
  for (std::uint32_t id = 0; id < table.count; ++id) {
    if (id == query_id) {
      continue;
    }
    const auto row = table.row(id);
    const double rn = norm(row);
    const double sim = rn == 0.0 ? kZeroNormSentinel : dot(q, row) / (qn * rn);
    neighbors.push_back({id, sim});
  }
  sort_neighbors(neighbors);
  neighbors.resize(k);
  return neighbors;
}

HyperplaneSet make_hyperplanes(std::uint32_t bits, std::uint32_t dim,
                               std::uint64_t seed) {
  if (bits == 0 || dim == 0) {
    throw ValidationError("hyperplane set needs positive bits and dim");
  }
  HyperplaneSet planes;
  planes.bits = bits;
  planes.dim = dim;
  planes.normals.resize(static_cast<std::size_t>(bits) * dim);
  Rng rng(seed);
  for (auto& v : planes.normals) {
    v = static_cast<float>(rng.normal());
  }
  return planes;
}

LshCode lsh_code(std::span<const float> v, const HyperplaneSet& hyperplanes) {
  if (v.size() != hyperplanes.dim) {
    throw ValidationError("vector dimension does not match hyperplanes");
  }
  LshCode code;
  code.bits = hyperplanes.bits;
  code.words.assign((hyperplanes.bits + 63) / 64, 0);
  for (std::uint32_t j = 0; j < hyperplanes.bits; ++j) {
    const std::span<const float> h(
        hyperplanes.normals.data() + static_cast<std::size_t>(j) * hyperplanes.dim,
        hyperplanes.dim);
    if (dot(v, h) >= 0.0) {
      code.words[j / 64] |= std::uint64_t{1} << (j % 64);
    }
  }
  return code;
}

std::uint32_t hamming_distance(const LshCode& a, const LshCode& b) {
  if (a.bits != b.bits) {
    throw ValidationError("hamming distance of codes with different widths");
  }
  std::uint32_t distance = 0;
  for (std::size_t w = 0; w < a.words.size(); ++w) {
    distance += static_cast<std::uint32_t>(std::popcount(a.words[w] ^ b.words[w]));
  }
  return distance;
}

RpTree RpTree::build(const EmbeddingTableView& points,
                     std::size_t leaf_capacity, std::uint64_t seed) {
  if (points.count == 0) {
    throw ValidationError("cannot build a tree over an empty table");
  }
  if (leaf_capacity == 0) {
    throw ValidationError("leaf capacity must be positive");
  }

  RpTree tree;
  tree.dim_ = points.dim;
  Rng rng(seed);

  // Recursive split; children are created before the parent's ids are
  // finalized, so the parent is allocated first and patched afterwards.
  const auto split = [&](auto&& self, std::vector<std::uint32_t> ids) -> std::int32_t {
    const auto node_id = static_cast<std::int32_t>(tree.nodes_.size());
    tree.nodes_.emplace_back();
    if (ids.size() <= leaf_capacity) {
      tree.nodes_[node_id].leaf = static_cast<std::int32_t>(tree.leaves_.size());
      tree.leaves_.push_back(std::move(ids));
      return node_id;
    }

    const std::uint32_t plane_id =
        static_cast<std::uint32_t>(tree.planes_.size() / points.dim);
    for (std::uint32_t kdim = 0; kdim < points.dim; ++kdim) {
      tree.planes_.push_back(static_cast<float>(rng.normal()));
    }
    const std::span<const float> plane(
        tree.planes_.data() + static_cast<std::size_t>(plane_id) * points.dim,
        points.dim);

    std::vector<double> projections(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      projections[i] = dot(points.row(ids[i]), plane);
    }
    // Rank split under the total order (projection, id): exactly ceil(n/2)
    // points go left regardless of projection ties.
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return projections[a] != projections[b]
                 ? projections[a] < projections[b]
                 : ids[a] < ids[b];
    });
    const std::size_t left_count = (ids.size() + 1) / 2;

    std::vector<std::uint32_t> left_ids;
    std::vector<std::uint32_t> right_ids;
    left_ids.reserve(left_count);
    right_ids.reserve(ids.size() - left_count);
    for (std::size_t i = 0; i < order.size(); ++i) {
      (i < left_count ? left_ids : right_ids).push_back(ids[order[i]]);
    }
    const double threshold = projections[order[left_count - 1]];

    const auto left_node = self(self, std::move(left_ids));
    const auto right_node = self(self, std::move(right_ids));
    tree.nodes_[node_id].plane = plane_id;
    tree.nodes_[node_id].threshold = threshold;
    tree.nodes_[node_id].left = left_node;
    tree.nodes_[node_id].right = right_node;
    return node_id;
  };

  std::vector<std::uint32_t> all(points.count);
  std::iota(all.begin(), all.end(), 0u);
  split(split, std::move(all));
  return tree;
}

const std::vector<std::uint32_t>& RpTree::leaf_for(
    std::span<const float> q) const {
  if (q.size() != dim_) {
    throw ValidationError("query dimension does not match the tree");
  }
  std::int32_t node = 0;
  while (nodes_[node].leaf < 0) {
    const std::span<const float> plane(
        planes_.data() + static_cast<std::size_t>(nodes_[node].plane) * dim_,
        dim_);
    const double projection = dot(q, plane);
    node = projection <= nodes_[node].threshold ? nodes_[node].left
                                                : nodes_[node].right;
  }
  return leaves_[nodes_[node].leaf];
}

std::vector<RpTree> build_rp_forest(const EmbeddingTableView& points,
                                    std::size_t n_trees,
                                    std::size_t leaf_capacity,
                                    std::uint64_t seed) {
  if (n_trees == 0) {
    throw ValidationError("forest needs at least one tree");
  }
  std::vector<RpTree> trees;
  trees.reserve(n_trees);
  for (std::size_t t = 0; t < n_trees; ++t) {
    trees.push_back(RpTree::build(points, leaf_capacity, mix_seed(seed, t)));
  }
  return trees;
}

std::vector<Neighbor> query_forest(const std::vector<RpTree>& trees,
                                   const EmbeddingTableView& points,
                                   std::span<const float> q, std::size_t k) {
  if (trees.empty()) {
    throw ValidationError("forest needs at least one tree");
  }
  const double qn = norm(q);
  if (qn == 0.0) {
    throw ValidationError("query vector has zero norm");
  }

  std::unordered_set<std::uint32_t> candidate_set;
  for (const auto& tree : trees) {
    for (auto id : tree.leaf_for(q)) {
      candidate_set.insert(id);
    }
  }

  std::vector<Neighbor> neighbors;
  neighbors.reserve(candidate_set.size());
  for (auto id : candidate_set) {
    const auto row = points.row(id);
    const double rn = norm(row);
    const double sim = rn == 0.0 ? kZeroNormSentinel : dot(q, row) / (qn * rn);
    neighbors.push_back({id, sim});
  }
  sort_neighbors(neighbors);
  if (neighbors.size() > k) {
    neighbors.resize(k);
  }
  return neighbors;
}

}  // namespace hybridfm
