#include "hybridfm/svd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hybridfm/errors.hpp"
#include "hybridfm/rng.hpp"

namespace hybridfm {

namespace {

double column_dot(const std::vector<double>& m, std::size_t n_rows,
                  std::size_t n_cols, std::size_t a, std::size_t b) {
  double acc = 0.0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    acc += m[r * n_cols + a] * m[r * n_cols + b];
  }
  return acc;
}

// Modified Gram-Schmidt with one re-orthogonalization pass per column.
// Columns that collapse (rank deficiency) are replaced with fresh random
// directions so the basis always has full column count.
void orthonormalize_columns(std::vector<double>& m, std::size_t n_rows,
                            std::size_t n_cols, Rng& rng) {
  for (std::size_t j = 0; j < n_cols; ++j) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (int pass = 0; pass < 2; ++pass) {
        for (std::size_t i = 0; i < j; ++i) {
          const double proj = column_dot(m, n_rows, n_cols, i, j);
          for (std::size_t r = 0; r < n_rows; ++r) {
            m[r * n_cols + j] -= proj * m[r * n_cols + i];
          }
        }
      }
      const double norm =
          std::sqrt(column_dot(m, n_rows, n_cols, j, j));
      if (norm > 1e-10) {
        for (std::size_t r = 0; r < n_rows; ++r) {
          m[r * n_cols + j] /= norm;
        }
        break;
      }
      for (std::size_t r = 0; r < n_rows; ++r) {
        m[r * n_cols + j] = rng.normal();
      }
    }
  }
}

// Cyclic Jacobi eigensolver for a symmetric k x k matrix. On return `t` is
// (numerically) diagonal and `vectors` holds the eigenvectors as columns.
void jacobi_eigen(std::vector<double>& t, std::vector<double>& vectors,
                  std::size_t k) {
  vectors.assign(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    vectors[i * k + i] = 1.0;
  }
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        off += t[p * k + q] * t[p * k + q];
      }
    }
    if (off < 1e-30) {
      break;
    }
    for (std::size_t p = 0; p < k; ++p) {
      for (std::size_t q = p + 1; q < k; ++q) {
        const double apq = t[p * k + q];
        if (std::abs(apq) < 1e-300) {
          continue;
        }
        const double theta = (t[q * k + q] - t[p * k + p]) / (2.0 * apq);
        const double sign = theta >= 0.0 ? 1.0 : -1.0;
        const double tan_phi =
            sign / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(tan_phi * tan_phi + 1.0);
        const double s = tan_phi * c;

        for (std::size_t r = 0; r < k; ++r) {
          const double trp = t[r * k + p];
          const double trq = t[r * k + q];
          t[r * k + p] = c * trp - s * trq;
          t[r * k + q] = s * trp + c * trq;
        }
        for (std::size_t col = 0; col < k; ++col) {
          const double tpc = t[p * k + col];
          const double tqc = t[q * k + col];
          t[p * k + col] = c * tpc - s * tqc;
          t[q * k + col] = s * tpc + c * tqc;
        }
        for (std::size_t r = 0; r < k; ++r) {
          const double vrp = vectors[r * k + p];
          const double vrq = vectors[r * k + q];
          vectors[r * k + p] = c * vrp - s * vrq;
          vectors[r * k + q] = s * vrp + c * vrq;
        }
      }
    }
  }
}

}  // namespace

LatentFactorization truncated_svd(const SparseMatrix& m, std::uint32_t d,
                                  std::uint64_t seed) {
  const std::size_t n_rows = m.rows();
  const std::size_t n_cols = m.cols();
  if (d == 0 || d > std::min(n_rows, n_cols)) {
    throw ValidationError("factorization rank must be in [1, min(rows, cols)]");
  }
  const std::size_t k = std::min<std::size_t>(d + 8, std::min(n_rows, n_cols));

  Rng rng(mix_seed(seed, 0x5fd1));

  // Range finder: Q spans the dominant column space of A after a few
  // alternating projections.
  std::vector<double> q(n_rows * k);
  {
    std::vector<double> omega_col(n_cols);
    std::vector<double> y_col(n_rows);
    std::vector<double> omega(n_cols * k);
    for (auto& v : omega) {
      v = rng.normal();
    }
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t c = 0; c < n_cols; ++c) {
        omega_col[c] = omega[c * k + j];
      }
      m.multiply(omega_col, y_col);
      for (std::size_t r = 0; r < n_rows; ++r) {
        q[r * k + j] = y_col[r];
      }
    }
  }
  orthonormalize_columns(q, n_rows, k, rng);

  std::vector<double> z(n_cols * k);
  std::vector<double> q_col(n_rows);
  std::vector<double> z_col(n_cols);
  for (int iter = 0; iter < 7; ++iter) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t r = 0; r < n_rows; ++r) {
        q_col[r] = q[r * k + j];
      }
      m.multiply_transpose(q_col, z_col);
      for (std::size_t c = 0; c < n_cols; ++c) {
        z[c * k + j] = z_col[c];
      }
    }
    orthonormalize_columns(z, n_cols, k, rng);
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t c = 0; c < n_cols; ++c) {
        z_col[c] = z[c * k + j];
      }
      m.multiply(z_col, q_col);
      for (std::size_t r = 0; r < n_rows; ++r) {
        q[r * k + j] = q_col[r];
      }
    }
    orthonormalize_columns(q, n_rows, k, rng);
  }

  // B = A^T Q, so Q B^T reproduces A on the captured subspace. The k x k
  // Gram matrix B^T B shares B's right singular structure.
  std::vector<double> b(n_cols * k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t r = 0; r < n_rows; ++r) {
      q_col[r] = q[r * k + j];
    }
    m.multiply_transpose(q_col, z_col);
    for (std::size_t c = 0; c < n_cols; ++c) {
      b[c * k + j] = z_col[c];
    }
  }

  std::vector<double> gram(k * k, 0.0);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i; j < k; ++j) {
      const double v = column_dot(b, n_cols, k, i, j);
      gram[i * k + j] = v;
      gram[j * k + i] = v;
    }
  }

  std::vector<double> eigvecs;
  jacobi_eigen(gram, eigvecs, k);

  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t bb) {
    return gram[a * k + a] > gram[bb * k + bb];
  });

  LatentFactorization out;
  out.rows = n_rows;
  out.cols = n_cols;
  out.d = d;
  out.singular_values.resize(d);
  out.left.assign(n_rows * d, 0.0);
  out.right.assign(n_cols * d, 0.0);

  for (std::uint32_t j = 0; j < d; ++j) {
    const std::size_t src = order[j];
    const double lambda = std::max(gram[src * k + src], 0.0);
    const double sigma = std::sqrt(lambda);
    out.singular_values[j] = sigma;

    // U column: Q * w.
    for (std::size_t r = 0; r < n_rows; ++r) {
      double acc = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        acc += q[r * k + l] * eigvecs[l * k + src];
      }
      out.left[r * d + j] = acc;
    }
    // V column: B * w / sigma; degenerate directions get an orthonormal
    // completion instead.
    if (sigma > 1e-10) {
      for (std::size_t c = 0; c < n_cols; ++c) {
        double acc = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
          acc += b[c * k + l] * eigvecs[l * k + src];
        }
        out.right[c * d + j] = acc / sigma;
      }
    } else {
      out.singular_values[j] = 0.0;
      for (int attempt = 0; attempt < 8; ++attempt) {
        for (std::size_t c = 0; c < n_cols; ++c) {
          out.right[c * d + j] = rng.normal();
        }
        for (int pass = 0; pass < 2; ++pass) {
          for (std::uint32_t prev = 0; prev < j; ++prev) {
            const double proj =
                column_dot(out.right, n_cols, d, prev, j);
            for (std::size_t c = 0; c < n_cols; ++c) {
              out.right[c * d + j] -= proj * out.right[c * d + prev];
            }
          }
        }
        const double norm =
            std::sqrt(column_dot(out.right, n_cols, d, j, j));
        if (norm > 1e-10) {
          for (std::size_t c = 0; c < n_cols; ++c) {
            out.right[c * d + j] /= norm;
          }
          break;
        }
      }
    }
  }
  return out;
}

double LatentFactorization::reconstruction_error(const SparseMatrix& m) const {
  // ||A - U S V^T||^2 = ||A||^2 - 2 <A, U S V^T> + ||U S V^T||^2, with the
  // cross term summed over A's nonzeros only.
  const double a_norm = m.frobenius_norm();
  double cross = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto idx = m.row_indices(static_cast<std::uint32_t>(r));
    const auto val = m.row_values(static_cast<std::uint32_t>(r));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      double entry = 0.0;
      for (std::uint32_t j = 0; j < d; ++j) {
        entry += singular_values[j] * left[r * d + j] * right[idx[i] * d + j];
      }
      cross += val[i] * entry;
    }
  }
  std::vector<double> gu(d * d, 0.0);
  std::vector<double> gv(d * d, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::uint32_t i = 0; i < d; ++i) {
      for (std::uint32_t j = 0; j < d; ++j) {
        gu[i * d + j] += left[r * d + i] * left[r * d + j];
      }
    }
  }
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::uint32_t i = 0; i < d; ++i) {
      for (std::uint32_t j = 0; j < d; ++j) {
        gv[i * d + j] += right[c * d + i] * right[c * d + j];
      }
    }
  }
  double model_norm_sq = 0.0;
  for (std::uint32_t i = 0; i < d; ++i) {
    for (std::uint32_t j = 0; j < d; ++j) {
      model_norm_sq += singular_values[i] * singular_values[j] *
                       gu[i * d + j] * gv[j * d + i];
    }
  }
  const double err_sq = a_norm * a_norm - 2.0 * cross + model_norm_sq;
  return std::sqrt(std::max(err_sq, 0.0));
}

}  // namespace hybridfm
