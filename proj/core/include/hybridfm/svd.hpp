#pragma once

#include <cstdint>
#include <vector>

#include "hybridfm/sparse.hpp"

namespace hybridfm {

// Rank-d factorization A ~ left * diag(singular_values) * right^T with
// singular values sorted descending and orthonormal factor columns.
struct LatentFactorization {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::uint32_t d = 0;
  std::vector<double> left;             // rows x d, row-major
  std::vector<double> singular_values;  // length d, descending
  std::vector<double> right;            // cols x d, row-major

  // Frobenius norm of A - left * diag(s) * right^T.
  double reconstruction_error(const SparseMatrix& m) const;
};

// Best rank-d approximation via randomized subspace iteration with a small
// Jacobi eigensolver on the projected Gram matrix. Deterministic for a fixed
// seed. Throws ValidationError when d > min(rows, cols) or d == 0.
LatentFactorization truncated_svd(const SparseMatrix& m, std::uint32_t d,
                                  std::uint64_t seed = 1);

}  // namespace hybridfm
