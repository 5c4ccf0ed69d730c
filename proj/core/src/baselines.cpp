#include "hybridfm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "hybridfm/dataset.hpp"
#include "hybridfm/errors.hpp"
#include "hybridfm/model.hpp"

namespace hybridfm {

namespace {

// Solves a (small, symmetric positive definite) dense system in place via
// Gaussian elimination with partial pivoting.
std::vector<double> solve_dense(std::vector<double> a, std::vector<double> b,
                                std::size_t n) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) {
        pivot = r;
      }
    }
    if (std::abs(a[pivot * n + col]) < 1e-300) {
      throw ValidationError("singular system in per-user regression");
    }
    if (pivot != col) {
      for (std::size_t c = 0; c < n; ++c) {
        std::swap(a[col * n + c], a[pivot * n + c]);
      }
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      for (std::size_t c = col; c < n; ++c) {
        a[r * n + c] -= factor * a[col * n + c];
      }
      b[r] -= factor * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double acc = b[r];
    for (std::size_t c = r + 1; c < n; ++c) {
      acc -= a[r * n + c] * x[c];
    }
    x[r] = acc / a[r * n + r];
  }
  return x;
}

// x_i . V for every item row: in-sample items land on U * Sigma, and items
// absent from the factorization (cold items) still get a projection.
std::vector<double> project_rows(const SparseMatrix& m,
                                 const std::vector<double>& right,
                                 std::uint32_t d) {
  std::vector<double> projected(m.rows() * d, 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto idx = m.row_indices(static_cast<std::uint32_t>(r));
    const auto val = m.row_values(static_cast<std::uint32_t>(r));
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const std::size_t base = static_cast<std::size_t>(idx[i]) * d;
      for (std::uint32_t j = 0; j < d; ++j) {
        projected[r * d + j] += val[i] * right[base + j];
      }
    }
  }
  return projected;
}

}  // namespace

FeatureMapping make_indicator_mapping(std::size_t n_users,
                                      std::size_t n_items) {
  FeatureMapping mapping;
  mapping.user_feature_sets.resize(n_users);
  mapping.item_feature_sets.resize(n_items);
  for (std::size_t u = 0; u < n_users; ++u) {
    const auto id = mapping.user_features.add(
        user_indicator_name(std::to_string(u)));
    mapping.user_feature_sets[u] = {id};
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto id = mapping.item_features.add(
        item_indicator_name(std::to_string(i)));
    mapping.item_feature_sets[i] = {id};
  }
  return mapping;
}

double LsiLrModel::score(std::uint32_t user, std::uint32_t item) const {
  if (item >= n_items) {
    throw std::out_of_range("item out of range");
  }
  if (user >= n_users) {
    return 0.0;  // never seen in training: chance-level score
  }
  double acc = intercepts[user];
  for (std::uint32_t j = 0; j < d; ++j) {
    acc += weights[user * d + j] * item_topics[item * d + j];
  }
  return acc;
}

LsiLrModel train_lsi_lr(const SparseMatrix& item_features,
                        const InteractionSet& train, std::uint32_t d,
                        std::uint64_t seed, double l2) {
  const auto factor = truncated_svd(item_features, d, seed);

  LsiLrModel model;
  model.d = d;
  model.n_items = item_features.rows();
  model.item_topics = project_rows(item_features, factor.right, d);

  std::uint32_t max_user = 0;
  for (const auto& t : train.all()) {
    if (t.item >= model.n_items) {
      throw ValidationError("interaction references an unknown item");
    }
    max_user = std::max(max_user, t.user);
  }
  model.n_users = train.empty() ? 0 : static_cast<std::size_t>(max_user) + 1;
  model.weights.assign(model.n_users * d, 0.0);
  model.intercepts.assign(model.n_users, 0.0);

  std::unordered_map<std::uint32_t, std::vector<Interaction>> by_user;
  for (const auto& t : train.all()) {
    by_user[t.user].push_back(t);
  }

  const std::size_t n = d + 1;  // weights plus intercept
  for (const auto& [user, examples] : by_user) {
    std::size_t positives = 0;
    for (const auto& t : examples) {
      positives += t.positive ? 1 : 0;
    }
    if (positives == 0 || positives == examples.size()) {
      // Separable in the intercept alone; pin it instead of diverging.
      model.intercepts[user] = positives == 0 ? -10.0 : 10.0;
      continue;
    }

    // Newton iterations on the ridge-penalized logistic loss.
    std::vector<double> theta(n, 0.0);
    for (int iter = 0; iter < 50; ++iter) {
      std::vector<double> grad(n, 0.0);
      std::vector<double> hess(n * n, 0.0);
      for (const auto& t : examples) {
        const double* z = model.item_topics.data() +
                          static_cast<std::size_t>(t.item) * d;
        double s = theta[d];
        for (std::uint32_t j = 0; j < d; ++j) {
          s += theta[j] * z[j];
        }
        const double p = sigmoid(s);
        const double g = p - (t.positive ? 1.0 : 0.0);
        const double w = std::max(p * (1.0 - p), 1e-10);
        for (std::uint32_t j = 0; j < d; ++j) {
          grad[j] += g * z[j];
          for (std::uint32_t l = 0; l < d; ++l) {
            hess[j * n + l] += w * z[j] * z[l];
          }
          hess[j * n + d] += w * z[j];
          hess[d * n + j] += w * z[j];
        }
        grad[d] += g;
        hess[d * n + d] += w;
      }
      for (std::uint32_t j = 0; j < d; ++j) {
        grad[j] += l2 * theta[j];
        hess[j * n + j] += l2;
      }
      hess[d * n + d] += 1e-9;  // keep the system nonsingular

      double grad_norm = 0.0;
      for (double g : grad) {
        grad_norm += g * g;
      }
      if (grad_norm < 1e-18) {
        break;
      }
      const auto delta = solve_dense(hess, grad, n);
      for (std::size_t j = 0; j < n; ++j) {
        theta[j] -= delta[j];
      }
    }
    for (std::uint32_t j = 0; j < d; ++j) {
      model.weights[static_cast<std::size_t>(user) * d + j] = theta[j];
    }
    model.intercepts[user] = theta[d];
  }
  return model;
}

double LsiUpModel::score(std::uint32_t user, std::uint32_t item) const {
  if (item >= n_items) {
    throw std::out_of_range("item out of range");
  }
  if (user >= n_users) {
    return 0.0;
  }
  double acc = 0.0;
  for (std::uint32_t j = 0; j < d; ++j) {
    acc += user_latents[user * d + j] * item_latents[item * d + j];
  }
  return acc;
}

LsiUpModel train_lsi_up(const SparseMatrix& item_features,
                        const InteractionSet& train, std::size_t n_users,
                        std::uint32_t d, std::uint64_t seed) {
  const std::size_t n_features = item_features.cols();

  // User profile rows: sums of the content vectors of positively interacted
  // items, L2-normalized so prolific users do not dominate the factorization.
  std::vector<std::unordered_map<std::uint32_t, double>> profile(n_users);
  for (const auto& t : train.all()) {
    if (t.item >= item_features.rows()) {
      throw ValidationError("interaction references an unknown item");
    }
    if (t.user >= n_users) {
      throw ValidationError("interaction references an unknown user");
    }
    if (!t.positive) {
      continue;
    }
    const auto idx = item_features.row_indices(t.item);
    const auto val = item_features.row_values(t.item);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      profile[t.user][idx[i]] += val[i];
    }
  }

  std::vector<SparseEntry> entries;
  for (std::size_t u = 0; u < n_users; ++u) {
    double norm = 0.0;
    for (const auto& [col, v] : profile[u]) {
      norm += v * v;
    }
    if (norm <= 0.0) {
      continue;
    }
    norm = std::sqrt(norm);
    for (const auto& [col, v] : profile[u]) {
      entries.push_back({static_cast<std::uint32_t>(u), col, v / norm});
    }
  }
  const SparseMatrix profiles(n_users, n_features, std::move(entries));
  const auto factor = truncated_svd(profiles, d, seed);

  LsiUpModel model;
  model.d = d;
  model.n_users = n_users;
  model.n_items = item_features.rows();
  model.feature_latents = factor.right;
  model.user_latents.assign(n_users * d, 0.0);
  for (std::size_t u = 0; u < n_users; ++u) {
    for (std::uint32_t j = 0; j < d; ++j) {
      model.user_latents[u * d + j] =
          factor.left[u * d + j] * factor.singular_values[j];
    }
  }
  model.item_latents = project_rows(item_features, factor.right, d);
  return model;
}

}  // namespace hybridfm
