#include <gtest/gtest.h>

#include <random>

#include "support/fixtures.hpp"
#include "support/reference.hpp"
#include "zoadmm/diagnostics.hpp"
#include "zoadmm/solver.hpp"

using namespace zoadmm;

namespace {

Vector random_vector(int d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  Vector x(d);
  for (auto& e : x.reshaped()) e = gauss(rng);
  return x;
}

TransitionSnapshot repeated_state(const Vector& x, const std::vector<Vector>& y, const Vector& lambda) {
  return TransitionSnapshot{{3, x, y, lambda}, {4, x, y, lambda}, 1e-4};
}

}  // namespace

TEST(ObjectiveValue, Examples) {
  // all-zero state with zero loss and zero penalties
  auto zero_oracle = std::make_shared<BlackBoxObjective>(2, 2, [](int, const Vector&) { return 0.0; });
  ConstrainedProblem zero_problem;
  zero_problem.objective = zero_oracle;
  zero_problem.A = Matrix::Identity(2, 2);
  zero_problem.c = Vector::Zero(2);
  zero_problem.blocks.push_back(PenaltyBlock::l1(1.0, -Matrix::Identity(2, 2)));
  EXPECT_DOUBLE_EQ(objective_value(zero_problem, Vector::Zero(2), {Vector::Zero(2)}), 0.0);

  // each f_i = ||x||^2 at x=(1,1) plus |.|_1 at y=(1): 2 + 1 = 3
  auto problem = testsupport::lasso_split(testsupport::scaled_norm_oracle({1.0, 1.0, 1.0}, 2), 1.0, 2.0);
  Vector x(2);
  x << 1.0, 1.0;
  Vector y(2);
  y << 1.0, 0.0;
  EXPECT_DOUBLE_EQ(objective_value(problem, x, {y}), 3.0);

  // penalties only: |.|_1 at (-2, 0.5) = 2.5
  Vector y2(2);
  y2 << -2.0, 0.5;
  EXPECT_DOUBLE_EQ(objective_value(zero_problem, Vector::Zero(2), {y2}), 2.5);
}

TEST(ObjectiveValue, CostsOneOraclePassAndRejectsNonFinite) {
  auto problem = testsupport::lasso_split(testsupport::scaled_norm_oracle({1.0, 2.0, 3.0}, 2), 0.1, 6.0);
  const long long before = problem.objective->eval_count();
  objective_value(problem, Vector::Ones(2), problem.zero_blocks());
  EXPECT_EQ(problem.objective->eval_count() - before, 3);

  auto bad = std::make_shared<BlackBoxObjective>(
      1, 1, [](int, const Vector&) { return std::numeric_limits<double>::infinity(); });
  auto bad_problem = testsupport::lasso_split(bad, 0.1, 1.0);
  EXPECT_THROW(objective_value(bad_problem, Vector::Zero(1), bad_problem.zero_blocks()), NonFiniteValueError);
}

TEST(Theta, Examples) {
  // all displacements zero
  EXPECT_DOUBLE_EQ(theta_value(0.0, 0.0, 2.5, 0.0, 0.0, 0.0), 0.0);
  // d/b = 1, only the forward x displacement set
  EXPECT_DOUBLE_EQ(theta_value(1.0, 0.0, 1.0, 0.0, 0.0, 0.0), 1.0);
  // every term contributes once
  EXPECT_DOUBLE_EQ(theta_value(1.0, 2.0, 0.5, 3.0, 4.0, 5.0), 1.0 + 2.0 + 0.5 * 7.0 + 5.0);
}

TEST(StationarityGap, VanishesAtStationaryFeasiblePoint) {
  // f_i(x) = 0.5||x - b_i||^2 with mean(b) = 0 has its minimum at x* = 0;
  // psi = 0, y* = x*, lambda* = 0 is a stationary feasible point.
  const int n = 6, d = 3;
  auto shifts = std::make_shared<Matrix>(n, d);
  std::mt19937_64 rng(31);
  for (int i = 0; i + 1 < n; i += 2) {
    for (int j = 0; j < d; ++j) {
      const double v = random_vector(1, rng)[0];
      (*shifts)(i, j) = v;
      (*shifts)(i + 1, j) = -v;
    }
  }
  auto oracle = std::make_shared<BlackBoxObjective>(n, d, [shifts](int i, const Vector& x) {
    return 0.5 * (x - shifts->row(i).transpose()).squaredNorm();
  });
  auto problem = testsupport::lasso_split(oracle, 0.0, 1.0);

  const Vector x_star = Vector::Zero(d);
  const std::vector<Vector> y_star = {x_star};
  const Vector lambda_star = Vector::Zero(d);

  SolverConfig cfg;
  cfg.eta = 0.1;
  cfg.rho = 1.0;
  const auto geo = resolve_geometry(problem, cfg);
  const Vector g_full = estimate_full_gradient(*oracle, x_star, 1e-5);
  const auto gap = stationarity_gap(problem, repeated_state(x_star, y_star, lambda_star), geo.coeffs, g_full);
  EXPECT_LE(gap.total(), 1e-12);
}

TEST(StationarityGap, LambdaResidualIsSquaredNorm) {
  auto problem = testsupport::lasso_split(testsupport::quadratic_norm_oracle(2), 0.1, 2.0);
  SolverConfig cfg;
  const auto geo = resolve_geometry(problem, cfg);

  // x - y = (0.3, -0.4): the lambda component must be 0.25
  Vector x(2), y(2);
  x << 0.5, 0.1;
  y << 0.2, 0.5;
  const auto gap =
      stationarity_gap(problem, repeated_state(x, {y}, Vector::Zero(2)), geo.coeffs, Vector::Zero(2));
  EXPECT_NEAR(gap.lambda_sq, 0.25, 1e-12);
  EXPECT_GE(gap.x_sq, 0.0);
  EXPECT_GE(gap.y_sq(), 0.0);
  EXPECT_DOUBLE_EQ(gap.total(), gap.x_sq + gap.y_sq() + gap.lambda_sq);
}

TEST(StationarityGap, RejectsNonConsecutiveStates) {
  auto problem = testsupport::lasso_split(testsupport::quadratic_norm_oracle(2), 0.1, 2.0);
  SolverConfig cfg;
  const auto geo = resolve_geometry(problem, cfg);
  TransitionSnapshot pair = repeated_state(Vector::Zero(2), {Vector::Zero(2)}, Vector::Zero(2));
  pair.after.iter = pair.before.iter + 2;
  EXPECT_THROW(stationarity_gap(problem, pair, geo.coeffs, Vector::Zero(2)), MismatchedStatesError);
}

// The y-residual reconstructs the specific subgradient element the prox
// update certifies, so the true subdifferential distance can never exceed
// the residual-formula gap on transitions produced by actual updates.
TEST(StationarityGap, DominatesBruteForceDistanceOnEngineTransitions) {
  const double tau = 0.4;
  const auto instance = testsupport::ShiftedQuadratic::make(8, 2, 33);
  auto problem = testsupport::lasso_split(instance.oracle, tau, 1.0);

  SolverConfig cfg;
  cfg.variant = Variant::ZoAdmm;
  cfg.iterations = 12;
  cfg.eta = 0.15;
  cfg.rho = 1.0;
  cfg.mu = SmoothingSchedule::fixed(1e-5);
  const auto geo = resolve_geometry(problem, cfg);

  // replay iterations manually to capture every transition
  Vector x = Vector::Zero(2);
  std::vector<Vector> y = problem.zero_blocks();
  Vector lambda = Vector::Zero(2);
  for (long t = 0; t < cfg.iterations; ++t) {
    const Vector x_old = x;
    const std::vector<Vector> y_old = y;
    const Vector g = estimate_full_gradient(*problem.objective, x, 1e-5);
    for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
      y[j] = update_y_block(problem, x, y, j, lambda, geo.coeffs);
    }
    const Vector res_y = problem.constraint_residual(x, y);
    x = update_x(problem, x, g, lambda, res_y, geo.coeffs.eta, geo.coeffs.rho, geo.coeffs.r);
    lambda = update_dual(lambda, geo.coeffs.rho, problem.constraint_residual(x, y));

    const Vector g_after = estimate_full_gradient(*problem.objective, x, 1e-5);
    const TransitionSnapshot pair{{t, x_old, y_old, Vector::Zero(2)}, {t + 1, x, y, lambda}, 1e-5};
    const double formula = stationarity_gap(problem, pair, geo.coeffs, g_after).total();
    const double brute = testsupport::brute_force_stationarity_sq(problem, g_after, x, y[0], lambda, tau);
    EXPECT_LE(brute, formula + 1e-9) << "iteration " << t;
  }
}

// Near a converged point the residual formula and the brute-force
// subdifferential distance coincide.
TEST(StationarityGap, AgreesWithBruteForceNearConvergence) {
  const double tau = 0.3;
  const auto instance = testsupport::ShiftedQuadratic::make(8, 2, 34);
  auto problem = testsupport::lasso_split(instance.oracle, tau, 1.0);

  SolverConfig cfg;
  cfg.variant = Variant::ZoAdmm;
  cfg.iterations = 4000;
  cfg.eta = 0.2;
  cfg.rho = 1.0;
  cfg.mu = SmoothingSchedule::fixed(1e-6);
  cfg.output_rule = OutputRule::Last;
  cfg.gap_stride = cfg.iterations;  // sample only at the end
  const auto result = run(problem, cfg);

  ASSERT_TRUE(result.argmin_transition.has_value());
  const auto& pair = *result.argmin_transition;
  const Vector g_after = estimate_full_gradient(*problem.objective, pair.after.x, 1e-6);
  const double formula = stationarity_gap(problem, pair, result.geometry.coeffs, g_after).total();
  const double brute = testsupport::brute_force_stationarity_sq(problem, g_after, pair.after.x, pair.after.y[0],
                                                                pair.after.lambda, tau);
  EXPECT_LE(brute, formula + 1e-9);
  EXPECT_NEAR(brute, formula, 1e-6);
  EXPECT_LT(formula, 1e-6);  // actually converged
}

// SAGA theta bookkeeping: the engine caches the previous iterate's mean
// squared table distance; recomputing both terms from preserved table copies
// must give the same theta.
TEST(Theta, SagaCachedTermMatchesScratchRecompute) {
  const int n = 10, d = 4;
  const auto instance = testsupport::ShiftedQuadratic::make(n, d, 35);
  std::mt19937_64 rng(36);
  std::uniform_int_distribution<int> pick(0, n - 1);

  auto table = SagaTable::init(*instance.oracle, Vector::Zero(d), 1e-3);
  Vector x_prev = random_vector(d, rng);
  double cached_prev = table.mean_sq_dist(x_prev);
  SagaTable table_prev = table;

  const double d_over_b = static_cast<double>(d) / 3.0;
  for (int step = 0; step < 100; ++step) {
    std::vector<int> batch(3);
    for (auto& b : batch) b = pick(rng);
    const Vector x_cur = random_vector(d, rng);
    const Vector x_next = random_vector(d, rng);

    const double mem_cur = table.mean_sq_dist(x_cur);
    const double incremental = theta_value((x_next - x_cur).squaredNorm(), (x_cur - x_prev).squaredNorm(),
                                           d_over_b, mem_cur, cached_prev, 0.0);
    const double scratch = theta_value((x_next - x_cur).squaredNorm(), (x_cur - x_prev).squaredNorm(), d_over_b,
                                       table.mean_sq_dist(x_cur), table_prev.mean_sq_dist(x_prev), 0.0);
    EXPECT_EQ(incremental, scratch);

    table_prev = table;
    saga_update(*instance.oracle, table, batch, x_cur, 1e-3);
    cached_prev = mem_cur;
    x_prev = x_cur;
  }
}

// Budget sweep on the convex surrogate: the sample gap at the argmin-theta
// iterate falls monotonically as T doubles, at a log-log slope steeper than
// the O(1/T) reference rate.
TEST(StationarityGap, ShrinksAcrossDoublingBudgets) {
  const auto [data, planted] = synth_dataset(200, 20, 0.3, 0.1, 17);
  const auto model = least_squares_oracle(data);
  auto problem = build_lasso_problem(model, 0.1);

  std::vector<double> gaps, log_t, log_gap;
  for (long T : {250L, 500L, 1000L, 2000L}) {
    double mean_gap = 0.0;
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
      SolverConfig cfg;
      cfg.variant = Variant::ZoSvrgAdmm;
      cfg.iterations = T;
      cfg.batch_size = 10;
      cfg.eta = 0.002;
      cfg.rho = 1.0;
      cfg.mu = SmoothingSchedule::decaying();
      cfg.seed = seed;
      cfg.output_rule = OutputRule::ArgminTheta;
      cfg.gap_stride = T + 1;
      const auto result = run(problem, cfg);
      const auto& pair = *result.argmin_transition;
      const Vector g_full = estimate_full_gradient(*problem.objective, pair.after.x, pair.mu);
      mean_gap += stationarity_gap(problem, pair, result.geometry.coeffs, g_full).total() / 5.0;
    }
    gaps.push_back(mean_gap);
    log_t.push_back(std::log(static_cast<double>(T)));
    log_gap.push_back(std::log(mean_gap));
  }
  for (std::size_t i = 1; i < gaps.size(); ++i) EXPECT_LT(gaps[i], gaps[i - 1]);

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < log_t.size(); ++i) {
    mx += log_t[i] / log_t.size();
    my += log_gap[i] / log_gap.size();
  }
  double num = 0, den = 0;
  for (std::size_t i = 0; i < log_t.size(); ++i) {
    num += (log_t[i] - mx) * (log_gap[i] - my);
    den += (log_t[i] - mx) * (log_t[i] - mx);
  }
  EXPECT_LE(num / den, -0.8);
}

TEST(LagrangianPenaltyPart, MatchesDirectFormula) {
  auto problem = testsupport::lasso_split(testsupport::quadratic_norm_oracle(3), 0.7, 2.0);
  std::mt19937_64 rng(37);
  const Vector x = random_vector(3, rng);
  const Vector y = random_vector(3, rng);
  const Vector lambda = random_vector(3, rng);
  const double rho = 1.3;
  const Vector res = x - y;
  const double expected = 0.7 * y.lpNorm<1>() - lambda.dot(res) + 0.5 * rho * res.squaredNorm();
  EXPECT_NEAR(lagrangian_penalty_part(problem, x, {y}, lambda, rho), expected, 1e-12);
}
