#include "hybridfm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hybridfm/errors.hpp"

namespace hybridfm {

SparseMatrix::SparseMatrix(std::size_t rows, std::size_t cols,
                           std::vector<SparseEntry> entries)
    : rows_(rows), cols_(cols) {
  for (const auto& e : entries) {
    if (e.row >= rows_ || e.col >= cols_) {
      throw ValidationError("sparse entry out of range");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const SparseEntry& a, const SparseEntry& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].row == entries[i - 1].row &&
        entries[i].col == entries[i - 1].col) {
      throw ValidationError("duplicate sparse cell");
    }
  }

  row_start_.assign(rows_ + 1, 0);
  col_index_.reserve(entries.size());
  values_.reserve(entries.size());
  for (const auto& e : entries) {
    ++row_start_[e.row + 1];
    col_index_.push_back(e.col);
    values_.push_back(e.value);
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    row_start_[r + 1] += row_start_[r];
  }
}

std::span<const std::uint32_t> SparseMatrix::row_indices(
    std::uint32_t row) const {
  if (row >= rows_) {
    throw std::out_of_range("sparse row out of range");
  }
  return {col_index_.data() + row_start_[row],
          row_start_[row + 1] - row_start_[row]};
}

std::span<const double> SparseMatrix::row_values(std::uint32_t row) const {
  if (row >= rows_) {
    throw std::out_of_range("sparse row out of range");
  }
  return {values_.data() + row_start_[row],
          row_start_[row + 1] - row_start_[row]};
}

void SparseMatrix::multiply(std::span<const double> x,
                            std::span<double> y) const {
  if (x.size() != cols_ || y.size() != rows_) {
    throw ValidationError("sparse multiply shape mismatch");
  }
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t i = row_start_[r]; i < row_start_[r + 1]; ++i) {
      acc += values_[i] * x[col_index_[i]];
    }
    y[r] = acc;
  }
}

void SparseMatrix::multiply_transpose(std::span<const double> x,
                                      std::span<double> y) const {
  if (x.size() != rows_ || y.size() != cols_) {
    throw ValidationError("sparse multiply shape mismatch");
  }
  std::fill(y.begin(), y.end(), 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t i = row_start_[r]; i < row_start_[r + 1]; ++i) {
      y[col_index_[i]] += values_[i] * x[r];
    }
  }
}

double SparseMatrix::row_dot(std::uint32_t row, std::span<const double> x) const {
  if (x.size() != cols_) {
    throw ValidationError("sparse row_dot shape mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = row_start_[row]; i < row_start_[row + 1]; ++i) {
    acc += values_[i] * x[col_index_[i]];
  }
  return acc;
}

double SparseMatrix::frobenius_norm() const {
  double acc = 0.0;
  for (double v : values_) {
    acc += v * v;
  }
  return std::sqrt(acc);
}

}  // namespace hybridfm
