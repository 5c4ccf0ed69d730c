#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace hybridfm {

struct SparseEntry {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  double value = 0.0;
};

// Row-compressed sparse matrix built from (row, col, value) triples; at most
// one entry per cell.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  // Throws ValidationError on out-of-range indices or duplicate cells.
  SparseMatrix(std::size_t rows, std::size_t cols,
               std::vector<SparseEntry> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return values_.size(); }

  std::span<const std::uint32_t> row_indices(std::uint32_t row) const;
  std::span<const double> row_values(std::uint32_t row) const;

  // y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  // y = A^T x
  void multiply_transpose(std::span<const double> x, std::span<double> y) const;

  // Dot product of one row with a dense vector.
  double row_dot(std::uint32_t row, std::span<const double> x) const;

  double frobenius_norm() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_start_;   // rows + 1
  std::vector<std::uint32_t> col_index_;
  std::vector<double> values_;
};

}  // namespace hybridfm
