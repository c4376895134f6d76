#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <random>
#include <string>

#include "zoadmm/diagnostics.hpp"
#include "zoadmm/estimators.hpp"
#include "zoadmm/problem.hpp"

namespace zoadmm {

enum class Variant { ZoAdmm, ZoSgdAdmm, ZoSvrgAdmm, ZoSagaAdmm };

enum class OutputRule { Last, ArgminTheta, UniformRandom };

inline std::string variant_name(Variant v) {
  switch (v) {
    case Variant::ZoAdmm: return "zo-admm";
    case Variant::ZoSgdAdmm: return "zo-sgd-admm";
    case Variant::ZoSvrgAdmm: return "zo-svrg-admm";
    case Variant::ZoSagaAdmm: return "zo-saga-admm";
  }
  return "unknown";
}

inline Variant parse_variant(const std::string& name) {
  if (name == "zo-admm" || name == "ZO_ADMM") return Variant::ZoAdmm;
  if (name == "zo-sgd-admm" || name == "ZO_SGD_ADMM") return Variant::ZoSgdAdmm;
  if (name == "zo-svrg-admm" || name == "ZO_SVRG_ADMM") return Variant::ZoSvrgAdmm;
  if (name == "zo-saga-admm" || name == "ZO_SAGA_ADMM") return Variant::ZoSagaAdmm;
  throw InvalidParameterError("unknown solver variant '" + name + "'");
}

inline std::string output_rule_name(OutputRule r) {
  switch (r) {
    case OutputRule::Last: return "last";
    case OutputRule::ArgminTheta: return "argmin_theta";
    case OutputRule::UniformRandom: return "uniform_random";
  }
  return "unknown";
}

inline OutputRule parse_output_rule(const std::string& name) {
  if (name == "last") return OutputRule::Last;
  if (name == "argmin_theta") return OutputRule::ArgminTheta;
  if (name == "uniform_random") return OutputRule::UniformRandom;
  throw InvalidParameterError("unknown output rule '" + name + "'");
}

struct SolverConfig {
  Variant variant = Variant::ZoSvrgAdmm;
  double eta = 0.1;
  double rho = 1.0;
  double r = 0.0;               // 0 -> 1.01 * (rho * eta * sigma_a_max + 1)
  std::vector<double> h;        // empty -> 1.01 * rho * sigma_max(B_j^T B_j) + 1e-8
  int batch_size = 1;
  long epoch_length = 0;        // SVRG; 0 -> ceil(n^(1/3))
  long iterations = 100;        // T
  long long max_evals = 0;      // optimization-evaluation budget; 0 = unlimited
  SmoothingSchedule mu = SmoothingSchedule::decaying();
  std::uint64_t seed = 0;
  OutputRule output_rule = OutputRule::ArgminTheta;
  long gap_stride = 0;          // stationarity sampling stride; 0 -> max(1, T/100)
  double divergence_limit = 1e12;
};

/// Linearization coefficients plus the spectra they were derived from.
struct SolverGeometry {
  LinearizationCoeffs coeffs;
  double sigma_a_min = 0.0;
  double sigma_a_max = 0.0;
  double sigma_g_min = 0.0;  // r - rho*eta*sigma_a_max
  double sigma_g_max = 0.0;  // r - rho*eta*sigma_a_min
  std::vector<double> sigma_b_max;
  long epoch_length = 0;

  double kappa_g() const { return sigma_g_max / sigma_g_min; }
};

inline SolverGeometry resolve_geometry(const ConstrainedProblem& problem, const SolverConfig& cfg) {
  if (!(cfg.eta > 0) || !(cfg.rho > 0)) throw InvalidParameterError("eta and rho must be positive");

  SolverGeometry geo;
  if (problem.sigma_a_max > 0) {
    geo.sigma_a_min = problem.sigma_a_min;
    geo.sigma_a_max = problem.sigma_a_max;
  } else {
    ConstrainedProblem copy = problem;
    const ValidationReport report = validate_problem(copy);
    geo.sigma_a_min = report.sigma_a_min;
    geo.sigma_a_max = report.sigma_a_max;
  }

  geo.coeffs.eta = cfg.eta;
  geo.coeffs.rho = cfg.rho;
  const double g_bound = cfg.rho * cfg.eta * geo.sigma_a_max + 1.0;
  geo.coeffs.r = cfg.r > 0 ? cfg.r : 1.01 * g_bound;
  if (!(geo.coeffs.r > g_bound)) {
    throw InvalidParameterError("r must exceed rho*eta*sigma_max(A^T A) + 1 so that G - I stays positive definite");
  }
  geo.sigma_g_min = geo.coeffs.r - cfg.rho * cfg.eta * geo.sigma_a_max;
  geo.sigma_g_max = geo.coeffs.r - cfg.rho * cfg.eta * geo.sigma_a_min;

  const std::size_t k = problem.blocks.size();
  if (!cfg.h.empty() && cfg.h.size() != k) throw InvalidParameterError("h must have one entry per penalty block");
  geo.sigma_b_max.resize(k);
  geo.coeffs.h.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    Eigen::JacobiSVD<Matrix> svd(problem.blocks[j].constraint());
    const double smax = svd.singularValues().size() > 0 ? svd.singularValues()[0] : 0.0;
    geo.sigma_b_max[j] = smax * smax;
    geo.coeffs.h[j] = cfg.h.empty() ? 1.01 * cfg.rho * geo.sigma_b_max[j] + 1e-8 : cfg.h[j];
    if (!(geo.coeffs.h[j] > cfg.rho * geo.sigma_b_max[j])) {
      throw InvalidParameterError("h[" + std::to_string(j) + "] must exceed rho*sigma_max(B^T B) so that H_j is positive definite");
    }
  }

  const long n = problem.components();
  geo.epoch_length = cfg.epoch_length > 0
                         ? cfg.epoch_length
                         : static_cast<long>(std::ceil(std::cbrt(static_cast<double>(n)) - 1e-9));
  if (geo.epoch_length < 1) geo.epoch_length = 1;
  return geo;
}

// ---------------------------------------------------------------------------
// Single-step updates
// ---------------------------------------------------------------------------

/// Block j prox step given v_j = A x + sum_{i<j} B_i y_i_new + sum_{i>=j} B_i y_i_old - c:
///   y_j+ = prox_{psi_j / h_j}( y_j - B_j^T (rho v_j - lambda) / h_j ).
inline Vector update_y_block_with_residual(const PenaltyBlock& block, const Vector& y_j, const Vector& v_j,
                                           const Vector& lambda, double rho, double h_j) {
  const Vector step = block.constraint().transpose() * (rho * v_j - lambda);
  return block.prox(y_j - step / h_j, 1.0 / h_j);
}

/// Gauss-Seidel y-update for block j; `y` must already hold the new values
/// for blocks before j and the old values from j on.
inline Vector update_y_block(const ConstrainedProblem& problem, const Vector& x, const std::vector<Vector>& y,
                             std::size_t j, const Vector& lambda, const LinearizationCoeffs& coeffs) {
  const Vector v = problem.constraint_residual(x, y);
  return update_y_block_with_residual(problem.blocks[j], y[j], v, lambda, coeffs.rho, coeffs.h[j]);
}

/// Closed-form x-update: with G = rI - rho*eta*A^T A the curvature term
/// collapses and the minimizer of the linearized Lagrangian is
///   x+ = x - (eta/r) * (g - A^T lambda + rho A^T (A x + sum B_j y_j+ - c)).
inline Vector update_x(const ConstrainedProblem& problem, const Vector& x, const Vector& grad_est,
                       const Vector& lambda, const Vector& res_after_y, double eta, double rho, double r) {
  return x - (eta / r) * (grad_est - problem.A.transpose() * lambda + rho * (problem.A.transpose() * res_after_y));
}

/// lambda+ = lambda - rho * (A x+ + sum B_j y_j+ - c).
inline Vector update_dual(const Vector& lambda, double rho, const Vector& res) { return lambda - rho * res; }

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

struct SolverState {
  Vector x;
  Vector x_prev;
  std::vector<Vector> y;
  Vector lambda;
  long iter = 0;
  long epoch = 1;
  std::optional<SvrgSnapshot> snapshot;
  std::optional<SagaTable> table;
  std::mt19937_64 rng;
};

struct SolverResult {
  // iterate selected by the output rule
  Vector x;
  std::vector<Vector> y;
  Vector lambda;
  long selected_iter = 0;
  double selected_theta = std::numeric_limits<double>::quiet_NaN();

  std::vector<IterationTrace> trace;
  long iterations_run = 0;
  long long opt_evals = 0;
  long long diag_evals = 0;
  SolverGeometry geometry;

  // smallest-theta transition seen (output candidates start at iterate 1)
  std::optional<TransitionSnapshot> argmin_transition;
  double argmin_theta = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline std::vector<int> draw_batch(std::mt19937_64& rng, int n, int b) {
  std::uniform_int_distribution<int> pick(0, n - 1);
  std::vector<int> batch(static_cast<std::size_t>(b));
  for (auto& idx : batch) idx = pick(rng);
  return batch;
}

}  // namespace detail

/// Runs the configured variant. The loop order per iteration is: gradient
/// estimate, Gauss-Seidel y-sweep, linearized x-step, dual ascent, then
/// (SAGA) table refresh at the pre-step iterate. One trace row is emitted
/// per iteration; diagnostics evaluations are tallied separately from the
/// optimization budget.
inline SolverResult run(const ConstrainedProblem& problem, const SolverConfig& cfg) {
  const auto& oracle = *problem.objective;
  const int n = oracle.components();
  const int d = oracle.dim();
  const std::size_t k = problem.blocks.size();
  if (cfg.iterations < 0) throw InvalidParameterError("iteration count must be nonnegative");
  const bool stochastic = cfg.variant != Variant::ZoAdmm;
  if (stochastic && (cfg.batch_size < 1 || cfg.batch_size > n)) {
    throw InvalidParameterError("batch size must lie in [1, n]");
  }

  SolverGeometry geo = resolve_geometry(problem, cfg);
  const double eta = geo.coeffs.eta;
  const double rho = geo.coeffs.rho;
  const double r = geo.coeffs.r;
  const long m = geo.epoch_length;
  const long T = cfg.iterations;
  const long stride = cfg.gap_stride > 0 ? cfg.gap_stride : std::max<long>(1, T / 100);

  SolverState state;
  state.x = Vector::Zero(d);
  state.x_prev = state.x;
  state.y = problem.zero_blocks();
  state.lambda = Vector::Zero(problem.rows());
  state.rng.seed(cfg.seed);
  std::mt19937_64 output_rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  SolverResult result;
  result.geometry = geo;
  result.trace.reserve(static_cast<std::size_t>(std::min<long>(T, 1 << 20)));

  const long long count_at_start = oracle.eval_count();
  long long diag_total = 0;
  auto opt_evals_so_far = [&]() { return oracle.eval_count() - count_at_start - diag_total; };
  auto measure_diag = [&](auto&& fn) {
    const long long before = oracle.eval_count();
    fn();
    diag_total += oracle.eval_count() - before;
  };

  if (cfg.variant == Variant::ZoSagaAdmm && T > 0) {
    state.table = SagaTable::init(oracle, state.x, cfg.mu.value(1, d));
  }

  Vector res = problem.constraint_residual(state.x, state.y);
  Vector x_prev_start = state.x;  // iterate at the start of the previous iteration
  double mem_prev = 0.0;          // variance-memory distance of the previous iterate
  const double d_over_b =
      (cfg.variant == Variant::ZoSvrgAdmm || cfg.variant == Variant::ZoSagaAdmm)
          ? static_cast<double>(d) / static_cast<double>(cfg.batch_size)
          : 0.0;

  std::optional<IterateSnapshot> reservoir;
  const auto t_start = std::chrono::steady_clock::now();

  long t = 0;
  for (; t < T; ++t) {
    if (cfg.max_evals > 0) {
      long long predicted = 0;
      switch (cfg.variant) {
        case Variant::ZoAdmm: predicted = 2LL * d * n; break;
        case Variant::ZoSgdAdmm: predicted = 2LL * d * cfg.batch_size; break;
        case Variant::ZoSvrgAdmm:
          predicted = 4LL * d * cfg.batch_size + (t % m == 0 ? 2LL * d * n : 0);
          break;
        case Variant::ZoSagaAdmm: predicted = 4LL * d * cfg.batch_size; break;
      }
      if (opt_evals_so_far() + predicted > cfg.max_evals) break;
    }

    const double mu = cfg.mu.value(t + 1, d);
    state.iter = t;
    state.epoch = cfg.variant == Variant::ZoSvrgAdmm ? t / m + 1 : 1;

    if (cfg.variant == Variant::ZoSvrgAdmm && t % m == 0) {
      state.snapshot = take_svrg_snapshot(oracle, state.x, mu);
    }

    std::vector<int> batch;
    Vector grad_est;
    switch (cfg.variant) {
      case Variant::ZoAdmm:
        grad_est = estimate_full_gradient(oracle, state.x, mu);
        break;
      case Variant::ZoSgdAdmm:
        batch = detail::draw_batch(state.rng, n, cfg.batch_size);
        grad_est = estimate_minibatch_gradient(oracle, batch, state.x, mu);
        break;
      case Variant::ZoSvrgAdmm:
        batch = detail::draw_batch(state.rng, n, cfg.batch_size);
        grad_est = svrg_gradient(oracle, batch, state.x, *state.snapshot, mu);
        break;
      case Variant::ZoSagaAdmm:
        batch = detail::draw_batch(state.rng, n, cfg.batch_size);
        grad_est = saga_gradient(oracle, batch, state.x, *state.table, mu);
        break;
    }

    // variance-memory distance of the current iterate, before any refresh
    double mem_cur = 0.0;
    if (cfg.variant == Variant::ZoSvrgAdmm) {
      mem_cur = (state.x - state.snapshot->x).squaredNorm();
    } else if (cfg.variant == Variant::ZoSagaAdmm) {
      mem_cur = state.table->mean_sq_dist(state.x);
    }

    const Vector x_old = state.x;
    const std::vector<Vector> y_old = state.y;
    const Vector lambda_old = state.lambda;

    // Gauss-Seidel sweep: res tracks A x + sum B_i y_i - c with the blocks
    // updated so far, which is exactly v_j when block j is reached.
    double dy_sum_sq = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const Vector y_new =
          update_y_block_with_residual(problem.blocks[j], state.y[j], res, state.lambda, rho, geo.coeffs.h[j]);
      res += problem.blocks[j].constraint() * (y_new - state.y[j]);
      dy_sum_sq += (y_new - state.y[j]).squaredNorm();
      state.y[j] = y_new;
    }

    const Vector x_new = update_x(problem, state.x, grad_est, state.lambda, res, eta, rho, r);
    res += problem.A * (x_new - state.x);
    state.x_prev = state.x;
    state.x = x_new;

    state.lambda = update_dual(state.lambda, rho, res);

    if (cfg.variant == Variant::ZoSagaAdmm) {
      saga_update(oracle, *state.table, batch, x_old, mu);
    }

    // ||A^T l+ - g - (G/eta)(x+ - x)|| with (G/eta)v = (r/eta)v - rho A^T A v
    const Vector dx = state.x - x_old;
    const Vector g_dx = (r / eta) * dx - rho * (problem.A.transpose() * (problem.A * dx));
    const double dual_consistency = (problem.A.transpose() * state.lambda - grad_est - g_dx).norm();

    const double theta =
        theta_value(dx.squaredNorm(), (x_old - x_prev_start).squaredNorm(), d_over_b, mem_cur, mem_prev, dy_sum_sq);

    IterationTrace row;
    row.iter = t + 1;
    row.epoch = state.epoch;
    row.theta = theta;
    row.dual_consistency = dual_consistency;
    row.grad_norm = grad_est.norm();
    row.primal_res = res.norm();

    measure_diag([&]() {
      const double f_val = smooth_objective(problem, state.x);
      row.objective = f_val + penalty_sum(problem, state.y);
      row.lagrangian = row.objective - state.lambda.dot(res) + 0.5 * rho * res.squaredNorm();
      if ((t + 1) % stride == 0) {
        const Vector g_full = estimate_full_gradient(oracle, state.x, mu);
        TransitionSnapshot pair{{t, x_old, y_old, lambda_old}, {t + 1, state.x, state.y, state.lambda}, mu};
        row.stat_gap = stationarity_gap(problem, pair, geo.coeffs, g_full).total();
        row.stat_sampled = true;
      }
    });

    row.evals = opt_evals_so_far();
    row.diag_evals = diag_total;
    row.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    result.trace.push_back(row);

    if (!std::isfinite(row.objective) || std::abs(row.objective) > cfg.divergence_limit ||
        state.lambda.norm() > cfg.divergence_limit) {
      throw DivergedError("solver diverged at iteration " + std::to_string(t + 1) +
                              " (objective or dual norm exceeded " + std::to_string(cfg.divergence_limit) + ")",
                          t + 1);
    }

    // theta belongs to the pre-step iterate; candidates start at iterate 1
    if (t >= 1 && (!result.argmin_transition || theta < result.argmin_theta)) {
      result.argmin_theta = theta;
      result.argmin_transition =
          TransitionSnapshot{{t, x_old, y_old, lambda_old}, {t + 1, state.x, state.y, state.lambda}, mu};
    }

    if (cfg.output_rule == OutputRule::UniformRandom) {
      // reservoir sample over iterates 1..T with a side RNG so the
      // trajectory itself is untouched by the output rule
      if (unit(output_rng) * static_cast<double>(t + 1) < 1.0) {
        reservoir = IterateSnapshot{t + 1, state.x, state.y, state.lambda};
      }
    }

    mem_prev = mem_cur;
    x_prev_start = x_old;
  }

  result.iterations_run = t;
  result.opt_evals = opt_evals_so_far();
  result.diag_evals = diag_total;

  switch (cfg.output_rule) {
    case OutputRule::ArgminTheta:
      if (result.argmin_transition) {
        result.x = result.argmin_transition->before.x;
        result.y = result.argmin_transition->before.y;
        result.lambda = result.argmin_transition->before.lambda;
        result.selected_iter = result.argmin_transition->before.iter;
        result.selected_theta = result.argmin_theta;
        return result;
      }
      break;  // fewer than two iterations: fall back to the last iterate
    case OutputRule::UniformRandom:
      if (reservoir) {
        result.x = reservoir->x;
        result.y = reservoir->y;
        result.lambda = reservoir->lambda;
        result.selected_iter = reservoir->iter;
        return result;
      }
      break;
    case OutputRule::Last:
      break;
  }
  result.x = state.x;
  result.y = state.y;
  result.lambda = state.lambda;
  result.selected_iter = t;
  return result;
}

}  // namespace zoadmm
