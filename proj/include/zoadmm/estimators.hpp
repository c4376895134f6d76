#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "zoadmm/oracle.hpp"

namespace zoadmm {

namespace detail {

// Central differences for every (component, coordinate) pair: row r of `out`
// receives the coordinate-smoothing gradient estimate of f_{idx[r]} at x.
// Tasks write disjoint slots and the reduction order downstream is fixed, so
// the result is identical for any worker count. Costs 2 * d * idx.size()
// oracle evaluations.
inline void component_gradients(const BlackBoxObjective& oracle, const std::vector<int>& idx, const Vector& x,
                                double mu, Matrix& out) {
  if (!(mu > 0)) throw InvalidParameterError("smoothing parameter must be positive");
  const Eigen::Index d = x.size();
  const long rows = static_cast<long>(idx.size());
  out.resize(rows, d);
  parallel_chunks(rows * d, [&](long begin, long end) {
    Vector work = x;
    for (long task = begin; task < end; ++task) {
      const long r = task / d;
      const Eigen::Index j = static_cast<Eigen::Index>(task % d);
      const int i = idx[static_cast<std::size_t>(r)];
      const double saved = work[j];
      work[j] = saved + mu;
      const double hi = oracle.eval(i, work);
      work[j] = saved - mu;
      const double lo = oracle.eval(i, work);
      work[j] = saved;
      if (!std::isfinite(hi) || !std::isfinite(lo)) {
        throw NonFiniteValueError("oracle returned a non-finite value for component " + std::to_string(i));
      }
      out(r, j) = (hi - lo) / (2.0 * mu);
    }
  });
}

inline Vector row_mean(const Matrix& rows) {
  Vector mean = Vector::Zero(rows.cols());
  for (Eigen::Index r = 0; r < rows.rows(); ++r) mean += rows.row(r);
  return mean / static_cast<double>(rows.rows());
}

}  // namespace detail

/// Coordinate-smoothing gradient estimate of a single component:
/// entry j is (f_i(x + mu e_j) - f_i(x - mu e_j)) / (2 mu). 2d evaluations.
inline Vector estimate_component_gradient(const BlackBoxObjective& oracle, int i, const Vector& x, double mu) {
  if (i < 0 || i >= oracle.components()) throw InvalidParameterError("component index out of range");
  Matrix rows;
  detail::component_gradients(oracle, {i}, x, mu, rows);
  return rows.row(0);
}

/// Mean of per-component estimates over a batch sampled with replacement;
/// duplicates contribute once per occurrence. 2d|batch| evaluations.
inline Vector estimate_minibatch_gradient(const BlackBoxObjective& oracle, const std::vector<int>& batch,
                                          const Vector& x, double mu) {
  if (batch.empty()) throw EmptyBatchError("mini-batch must be nonempty");
  Matrix rows;
  detail::component_gradients(oracle, batch, x, mu, rows);
  return detail::row_mean(rows);
}

/// Mean over all n components. 2dn evaluations.
inline Vector estimate_full_gradient(const BlackBoxObjective& oracle, const Vector& x, double mu) {
  std::vector<int> all(static_cast<std::size_t>(oracle.components()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  return estimate_minibatch_gradient(oracle, all, x, mu);
}

/// Epoch anchor: a reference point and the full zeroth-order gradient taken
/// there, kept together with the smoothing parameter it was measured at.
struct SvrgSnapshot {
  Vector x;
  Vector grad;
  double mu = 0.0;
};

inline SvrgSnapshot take_svrg_snapshot(const BlackBoxObjective& oracle, const Vector& x, double mu) {
  return SvrgSnapshot{x, estimate_full_gradient(oracle, x, mu), mu};
}

/// Variance-reduced estimate (1/b) sum_I grad_i(x) - (1/b) sum_I grad_i(x~) + snapshot.grad.
/// Both fresh terms use the current mu; the anchor term keeps its own.
/// 4d|batch| fresh evaluations.
inline Vector svrg_gradient(const BlackBoxObjective& oracle, const std::vector<int>& batch, const Vector& x,
                            const SvrgSnapshot& snapshot, double mu) {
  if (batch.empty()) throw EmptyBatchError("mini-batch must be nonempty");
  Matrix at_x, at_anchor;
  detail::component_gradients(oracle, batch, x, mu, at_x);
  detail::component_gradients(oracle, batch, snapshot.x, mu, at_anchor);
  return detail::row_mean(at_x) - detail::row_mean(at_anchor) + snapshot.grad;
}

/// Per-component memory: reference points z_i, the cached estimates grad_i at
/// those points, and their running mean. The mean is maintained incrementally
/// and must track (1/n) sum_i grad_i.
struct SagaTable {
  std::vector<Vector> z;
  std::vector<Vector> grad;
  std::vector<double> mu_at;
  Vector mean_grad;

  int size() const { return static_cast<int>(z.size()); }

  /// All references at x0; costs 2dn evaluations.
  static SagaTable init(const BlackBoxObjective& oracle, const Vector& x0, double mu) {
    SagaTable table;
    const int n = oracle.components();
    std::vector<int> all(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    Matrix rows;
    detail::component_gradients(oracle, all, x0, mu, rows);
    table.z.assign(static_cast<std::size_t>(n), x0);
    table.grad.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) table.grad.push_back(rows.row(i));
    table.mu_at.assign(static_cast<std::size_t>(n), mu);
    table.mean_grad = detail::row_mean(rows);
    return table;
  }

  /// Reference mean recomputed from the entries (drift check oracle).
  Vector mean_from_entries() const {
    Vector mean = Vector::Zero(mean_grad.size());
    for (const auto& g : grad) mean += g;
    return mean / static_cast<double>(grad.size());
  }

  /// (1/n) sum_i ||x - z_i||^2
  double mean_sq_dist(const Vector& x) const {
    double acc = 0.0;
    for (const auto& zi : z) acc += (x - zi).squaredNorm();
    return acc / static_cast<double>(z.size());
  }
};

/// (1/b) sum_{i in batch} (grad_i(x) - table.grad_i) + table.mean_grad, with
/// fresh terms at the current mu. Does not mutate the table. 2d|batch| fresh
/// evaluations.
inline Vector saga_gradient(const BlackBoxObjective& oracle, const std::vector<int>& batch, const Vector& x,
                            const SagaTable& table, double mu) {
  if (batch.empty()) throw EmptyBatchError("mini-batch must be nonempty");
  Matrix fresh;
  detail::component_gradients(oracle, batch, x, mu, fresh);
  Vector correction = Vector::Zero(x.size());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    correction += fresh.row(static_cast<Eigen::Index>(r)).transpose() - table.grad[static_cast<std::size_t>(batch[r])];
  }
  return correction / static_cast<double>(batch.size()) + table.mean_grad;
}

/// Refreshes the table at x_prev for the distinct indices of the batch
/// (duplicates update once) and folds the change into the running mean
/// incrementally. 2d evaluations per distinct index.
inline void saga_update(const BlackBoxObjective& oracle, SagaTable& table, const std::vector<int>& batch,
                        const Vector& x_prev, double mu) {
  if (batch.empty()) return;
  std::vector<int> distinct(batch);
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

  Matrix fresh;
  detail::component_gradients(oracle, distinct, x_prev, mu, fresh);
  const double n = static_cast<double>(table.size());
  for (std::size_t r = 0; r < distinct.size(); ++r) {
    const auto i = static_cast<std::size_t>(distinct[r]);
    const Vector updated = fresh.row(static_cast<Eigen::Index>(r));
    table.mean_grad -= (table.grad[i] - updated) / n;
    table.grad[i] = updated;
    table.z[i] = x_prev;
    table.mu_at[i] = mu;
  }
}

}  // namespace zoadmm
