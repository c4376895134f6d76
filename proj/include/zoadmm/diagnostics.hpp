#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "zoadmm/problem.hpp"

namespace zoadmm {

/// Per-iteration record. stat_gap is NaN on iterations where the sampled
/// full-gradient diagnostic was skipped; stat_sampled flags the rows where it
/// ran so evaluation accounting stays honest (its cost lands in diag_evals,
/// never in evals).
struct IterationTrace {
  long iter = 0;
  long epoch = 1;
  long long evals = 0;       // cumulative optimization evaluations
  long long diag_evals = 0;  // cumulative diagnostic evaluations
  double wall_s = 0.0;
  double objective = 0.0;
  double lagrangian = 0.0;
  double primal_res = 0.0;
  double stat_gap = std::numeric_limits<double>::quiet_NaN();
  double theta = 0.0;
  bool stat_sampled = false;
  double dual_consistency = 0.0;  // ||A^T l' - g - (G/eta)(x' - x)||
  double grad_norm = 0.0;         // ||g|| used in that identity's scale
};

struct IterateSnapshot {
  long iter = 0;
  Vector x;
  std::vector<Vector> y;
  Vector lambda;
};

/// Two consecutive iterates of one run plus the smoothing parameter active at
/// the transition; everything the stationarity residuals need.
struct TransitionSnapshot {
  IterateSnapshot before;
  IterateSnapshot after;
  double mu = 0.0;
};

/// Linearization coefficients shared by the solver and the diagnostics:
/// G = r I - rho eta A^T A and H_j = h_j I - rho B_j^T B_j.
struct LinearizationCoeffs {
  double eta = 0.0;
  double rho = 0.0;
  double r = 0.0;
  std::vector<double> h;
};

struct StationarityGap {
  double x_sq = 0.0;
  double lambda_sq = 0.0;
  std::vector<double> y_block_sq;

  double y_sq() const {
    double acc = 0.0;
    for (double v : y_block_sq) acc += v;
    return acc;
  }
  double total() const { return x_sq + y_sq() + lambda_sq; }
};

/// Squared distance to a stationary point measured through the optimality
/// residuals of one transition:
///   x block:       ||A^T lambda' - g_full||^2 with g_full the full
///                  zeroth-order gradient at the new x,
///   y block j:     ||rho B_j^T A dx + rho B_j^T sum_{i>j} B_i dy_i - H_j dy_j||^2,
///   lambda block:  ||A x' + sum_j B_j y_j' - c||^2.
inline StationarityGap stationarity_gap(const ConstrainedProblem& problem, const TransitionSnapshot& pair,
                                        const LinearizationCoeffs& coeffs, const Vector& full_grad_after) {
  if (pair.after.iter != pair.before.iter + 1) {
    throw MismatchedStatesError("stationarity gap needs consecutive iterates");
  }
  const std::size_t k = problem.blocks.size();
  StationarityGap gap;
  gap.x_sq = (problem.A.transpose() * pair.after.lambda - full_grad_after).squaredNorm();
  gap.lambda_sq = problem.constraint_residual(pair.after.x, pair.after.y).squaredNorm();

  const Vector a_dx = problem.A * (pair.after.x - pair.before.x);
  std::vector<Vector> b_dy(k);
  for (std::size_t j = 0; j < k; ++j) {
    b_dy[j] = problem.blocks[j].constraint() * (pair.after.y[j] - pair.before.y[j]);
  }
  gap.y_block_sq.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const Matrix& B = problem.blocks[j].constraint();
    Vector inside = coeffs.rho * a_dx;
    for (std::size_t i = j + 1; i < k; ++i) inside += coeffs.rho * b_dy[i];
    const Vector dy = pair.after.y[j] - pair.before.y[j];
    // H_j dy = h_j dy - rho B_j^T (B_j dy)
    Vector residual = B.transpose() * (inside + coeffs.rho * b_dy[j]) - coeffs.h[j] * dy;
    gap.y_block_sq[j] = residual.squaredNorm();
  }
  return gap;
}

/// f(x) = (1/n) sum_i f_i(x); n oracle evaluations.
inline double smooth_objective(const ConstrainedProblem& problem, const Vector& x) {
  const auto& oracle = *problem.objective;
  const int n = oracle.components();
  std::vector<double> values(static_cast<std::size_t>(n));
  parallel_chunks(n, [&](long begin, long end) {
    for (long i = begin; i < end; ++i) values[static_cast<std::size_t>(i)] = oracle.eval(static_cast<int>(i), x);
  });
  double acc = 0.0;
  for (double v : values) acc += v;
  const double f = acc / static_cast<double>(n);
  if (!std::isfinite(f)) throw NonFiniteValueError("objective is not finite");
  return f;
}

inline double penalty_sum(const ConstrainedProblem& problem, const std::vector<Vector>& y) {
  double acc = 0.0;
  for (std::size_t j = 0; j < problem.blocks.size(); ++j) acc += problem.blocks[j].psi(y[j]);
  return acc;
}

/// F(x, y) = f(x) + sum_j psi_j(y_j); n oracle evaluations.
inline double objective_value(const ConstrainedProblem& problem, const Vector& x, const std::vector<Vector>& y) {
  const double value = smooth_objective(problem, x) + penalty_sum(problem, y);
  if (!std::isfinite(value)) throw NonFiniteValueError("objective is not finite");
  return value;
}

/// Augmented Lagrangian terms that do not involve f:
///   sum_j psi_j(y_j) - lambda^T res + (rho/2) ||res||^2, res = Ax + sum B_j y_j - c.
/// The y-sweep leaves f(x) untouched, so its descent is measured on this part.
inline double lagrangian_penalty_part(const ConstrainedProblem& problem, const Vector& x,
                                      const std::vector<Vector>& y, const Vector& lambda, double rho) {
  const Vector res = problem.constraint_residual(x, y);
  return penalty_sum(problem, y) - lambda.dot(res) + 0.5 * rho * res.squaredNorm();
}

/// Displacement aggregate used for output selection: consecutive x and y
/// displacements plus (d/b)-weighted distances to the variance-reduction
/// reference points (snapshot for SVRG, table mean for SAGA, absent
/// otherwise), all as single-sample realizations.
inline double theta_value(double dx_next_sq, double dx_prev_sq, double d_over_b, double memory_cur,
                          double memory_prev, double dy_sum_sq) {
  return dx_next_sq + dx_prev_sq + d_over_b * (memory_cur + memory_prev) + dy_sum_sq;
}

}  // namespace zoadmm
