#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hybridfm {

// Row-major view over an embedding table.
struct EmbeddingTableView {
  const float* data = nullptr;
  std::size_t count = 0;
  std::uint32_t dim = 0;

  std::span<const float> row(std::size_t i) const {
    return {data + i * dim, dim};
  }
};

// a.b / (|a||b|); throws ValidationError on a zero vector.
double cosine_similarity(std::span<const float> a, std::span<const float> b);

struct Neighbor {
  std::uint32_t id = 0;
  double similarity = 0.0;
};

// The k highest-cosine rows excluding the query itself, ties broken by
// ascending id. Zero-norm candidate rows sort to the bottom. Throws
// std::out_of_range for an unknown id, ValidationError when k >= table size.
std::vector<Neighbor> top_k_exact(const EmbeddingTableView& table,
                                  std::uint32_t query_id, std::size_t k);

// k random hyperplane normals drawn from a seeded standard normal.
struct HyperplaneSet {
  std::uint32_t bits = 0;
  std::uint32_t dim = 0;
  std::vector<float> normals;  // bits x dim, row-major
};

HyperplaneSet make_hyperplanes(std::uint32_t bits, std::uint32_t dim,
                               std::uint64_t seed);

struct LshCode {
  std::uint32_t bits = 0;
  std::vector<std::uint64_t> words;
};

// Bit j is 1 iff v . h_j >= 0 (boundary inclusive), so codes are invariant
// under positive scaling of v.
LshCode lsh_code(std::span<const float> v, const HyperplaneSet& hyperplanes);

std::uint32_t hamming_distance(const LshCode& a, const LshCode& b);

// Binary space-partitioning tree: each internal node projects onto a random
// hyperplane and splits at the median rank, sending ceil(n/2) points left
// and floor(n/2) right, until leaves hold at most leaf_capacity points.
// Queries whose projection equals the stored threshold descend left.
class RpTree {
 public:
  struct Node {
    std::int32_t left = -1;    // child node ids; -1 on leaves
    std::int32_t right = -1;
    std::int32_t leaf = -1;    // leaf id when terminal
    std::uint32_t plane = 0;   // row into the plane table
    // Max projection of the left half. Kept in double so a stored point's
    // recomputed projection compares exactly against its own split.
    double threshold = 0.0;
  };

  static RpTree build(const EmbeddingTableView& points,
                      std::size_t leaf_capacity, std::uint64_t seed);

  const std::vector<std::uint32_t>& leaf_for(std::span<const float> q) const;

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::vector<std::vector<std::uint32_t>>& leaves() const {
    return leaves_;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<std::vector<std::uint32_t>> leaves_;
  std::vector<float> planes_;  // one row per internal node
  std::uint32_t dim_ = 0;
};

std::vector<RpTree> build_rp_forest(const EmbeddingTableView& points,
                                    std::size_t n_trees,
                                    std::size_t leaf_capacity,
                                    std::uint64_t seed);

// Descends every tree, unions the leaf candidates and reranks them by exact
// cosine against q; ties broken by ascending id.
std::vector<Neighbor> query_forest(const std::vector<RpTree>& trees,
                                   const EmbeddingTableView& points,
                                   std::span<const float> q, std::size_t k);

}  // namespace hybridfm
