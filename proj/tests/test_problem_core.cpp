#include <gtest/gtest.h>

#include <random>
#include <thread>

#include "support/fixtures.hpp"
#include "zoadmm/penalty.hpp"
#include "zoadmm/problem.hpp"

using namespace zoadmm;

TEST(ProxL1, SoftThresholdExamples) {
  Vector v(2);
  v << 1.5, -0.3;
  Vector out = prox_l1(v, 1.0);
  EXPECT_DOUBLE_EQ(out[0], 0.5);
  EXPECT_DOUBLE_EQ(out[1], 0.0);

  EXPECT_TRUE(prox_l1(Vector::Zero(4), 3.7).isZero(0));

  Vector w(2);
  w << 2.0, -2.0;
  Vector out2 = prox_l1(w, 0.5);
  EXPECT_DOUBLE_EQ(out2[0], 1.5);
  EXPECT_DOUBLE_EQ(out2[1], -1.5);
}

TEST(ProxGroupL2, ShrinkageExamples) {
  Vector v(2);
  v << 3.0, 4.0;
  EXPECT_TRUE(prox_group_l2(v, 5.0).isZero(0));

  Vector half = prox_group_l2(v, 2.5);
  EXPECT_DOUBLE_EQ(half[0], 1.5);
  EXPECT_DOUBLE_EQ(half[1], 2.0);

  EXPECT_TRUE(prox_group_l2(Vector::Zero(3), 1.0).isZero(0));
}

TEST(PenaltyBlock, ProxTendsToIdentityAsTauVanishes) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss(0.0, 2.0);
  Vector v(5);
  for (auto& e : v.reshaped()) e = gauss(rng);

  for (const auto& block :
       {PenaltyBlock::l1(1.3, Matrix::Identity(5, 5)), PenaltyBlock::group_l2(0.8, Matrix::Identity(5, 5))}) {
    double prev_gap = std::numeric_limits<double>::infinity();
    for (double tau : {1e-2, 1e-4, 1e-6, 1e-8}) {
      const double gap = (block.prox(v, tau) - v).norm();
      EXPECT_LE(gap, prev_gap + 1e-15);
      prev_gap = gap;
    }
    EXPECT_LT(prev_gap, 1e-6);
  }
}

// prox(v, tau) must beat every probe point on psi(w) + ||w - v||^2 / (2 tau).
TEST(PenaltyBlock, ProxOptimalityAgainstRandomProbes) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> gauss(0.0, 3.0);
  std::uniform_real_distribution<double> tau_dist(1e-3, 10.0);

  const auto blocks = {PenaltyBlock::l1(0.7, Matrix::Identity(4, 4)),
                       PenaltyBlock::group_l2(1.9, Matrix::Identity(4, 4)),
                       PenaltyBlock::none(Matrix::Identity(4, 4))};
  for (const auto& block : blocks) {
    for (int trial = 0; trial < 20; ++trial) {
      Vector v(4);
      for (auto& e : v.reshaped()) e = gauss(rng);
      const double tau = tau_dist(rng);
      const Vector p = block.prox(v, tau);
      const double value_at_prox = block.psi(p) + (p - v).squaredNorm() / (2.0 * tau);
      for (int probe = 0; probe < 100; ++probe) {
        Vector w(4);
        for (auto& e : w.reshaped()) e = gauss(rng);
        const double value_at_probe = block.psi(w) + (w - v).squaredNorm() / (2.0 * tau);
        EXPECT_LE(value_at_prox, value_at_probe + 1e-10);
      }
    }
  }
}

// Subgradient optimality of the l1 prox: (v - p)/tau lands in the
// subdifferential of weight * ||.||_1 at p.
TEST(PenaltyBlock, L1ProxSubgradientOptimality) {
  const double weight = 1.7;
  const auto block = PenaltyBlock::l1(weight, Matrix::Identity(6, 6));
  std::mt19937_64 rng(3);
  std::normal_distribution<double> gauss(0.0, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    Vector v(6);
    for (auto& e : v.reshaped()) e = gauss(rng);
    const double tau = 0.5;
    const Vector p = block.prox(v, tau);
    const Vector g = (v - p) / tau;
    for (int i = 0; i < 6; ++i) {
      if (p[i] != 0.0) {
        EXPECT_NEAR(g[i], weight * (p[i] > 0 ? 1.0 : -1.0), 1e-12);
      } else {
        EXPECT_LE(std::abs(g[i]), weight + 1e-12);
      }
    }
  }
}

TEST(BlackBoxObjective, DeterministicAndCounted) {
  auto oracle = testsupport::quadratic_norm_oracle(3);
  Vector x(3);
  x << 0.1, -2.7, 3.9;
  EXPECT_EQ(oracle->eval_count(), 0);
  const double a = oracle->eval(0, x);
  const double b = oracle->eval(0, x);
  EXPECT_EQ(a, b);  // bit-identical
  EXPECT_EQ(oracle->eval_count(), 2);
}

TEST(BlackBoxObjective, CounterIsAtomicUnderConcurrentEvals) {
  auto oracle = testsupport::quadratic_norm_oracle(2);
  const Vector x = Vector::Ones(2);
  std::vector<std::thread> pool;
  for (int w = 0; w < 4; ++w) {
    pool.emplace_back([&]() {
      for (int i = 0; i < 1000; ++i) oracle->eval(0, x);
    });
  }
  for (auto& th : pool) th.join();
  EXPECT_EQ(oracle->eval_count(), 4000);
}

TEST(SmoothingSchedule, FixedAndDecaying) {
  const auto fixed = SmoothingSchedule::fixed(0.05);
  EXPECT_DOUBLE_EQ(fixed.value(1, 10), 0.05);
  EXPECT_DOUBLE_EQ(fixed.value(999, 10), 0.05);

  const auto decay = SmoothingSchedule::decaying();
  for (long t : {1L, 2L, 7L, 100L}) {
    EXPECT_DOUBLE_EQ(decay.value(t, 20), 1.0 / (20.0 * std::sqrt(static_cast<double>(t))));
    EXPECT_GT(decay.value(t, 20), 0.0);
  }
  EXPECT_THROW(SmoothingSchedule::fixed(0.0), InvalidParameterError);
}

TEST(ValidateProblem, IdentitySplitting) {
  ConstrainedProblem problem;
  problem.objective = testsupport::quadratic_norm_oracle(3);
  problem.A = Matrix::Identity(3, 3);
  problem.c = Vector::Zero(3);
  problem.blocks.push_back(PenaltyBlock::none(-Matrix::Identity(3, 3)));
  const auto report = validate_problem(problem);
  EXPECT_NEAR(report.sigma_a_min, 1.0, 1e-12);
  EXPECT_NEAR(report.sigma_a_max, 1.0, 1e-12);
  EXPECT_EQ(problem.sigma_a_min, report.sigma_a_min);
}

TEST(ValidateProblem, ZeroColumnIsRankDeficient) {
  ConstrainedProblem problem;
  problem.objective = testsupport::quadratic_norm_oracle(2);
  problem.A = Matrix::Zero(2, 2);
  problem.A(0, 0) = 1.0;
  problem.c = Vector::Zero(2);
  problem.blocks.push_back(PenaltyBlock::none(-Matrix::Identity(2, 2)));
  EXPECT_THROW(validate_problem(problem), RankDeficientError);
}

TEST(ValidateProblem, WideMatrixIsRejected) {
  ConstrainedProblem problem;
  problem.objective = testsupport::quadratic_norm_oracle(3);
  problem.A = Matrix::Ones(2, 3);
  problem.c = Vector::Zero(2);
  problem.blocks.push_back(PenaltyBlock::none(-Matrix::Identity(2, 2)));
  EXPECT_THROW(validate_problem(problem), RankDeficientError);
}

// A = [I; G] stacked keeps sigma_min(A^T A) >= 1 for any G.
TEST(ValidateProblem, StackedIdentityKeepsRank) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int d = 4, e = 6;
    Matrix g(e, d);
    for (auto& v : g.reshaped()) v = gauss(rng);

    ConstrainedProblem problem;
    problem.objective = testsupport::quadratic_norm_oracle(d);
    problem.A = Matrix::Zero(d + e, d);
    problem.A.topRows(d) = Matrix::Identity(d, d);
    problem.A.bottomRows(e) = g;
    problem.c = Vector::Zero(d + e);
    problem.blocks.push_back(PenaltyBlock::none(-Matrix::Identity(d + e, d + e)));
    const auto report = validate_problem(problem);
    EXPECT_GE(report.sigma_a_min, 1.0 - 1e-9);
  }
}

TEST(ValidateProblem, BlockDimensionMismatchNamesBlock) {
  ConstrainedProblem problem;
  problem.objective = testsupport::quadratic_norm_oracle(2);
  problem.A = Matrix::Identity(2, 2);
  problem.c = Vector::Zero(2);
  problem.blocks.push_back(PenaltyBlock::none(-Matrix::Identity(2, 2)));
  problem.blocks.push_back(PenaltyBlock::none(-Matrix::Identity(3, 3)));  // wrong rows
  try {
    validate_problem(problem);
    FAIL() << "expected DimensionMismatchError";
  } catch (const DimensionMismatchError& e) {
    EXPECT_NE(std::string(e.what()).find("block 1"), std::string::npos);
  }
}

TEST(ValidateProblem, OffsetLengthMismatch) {
  ConstrainedProblem problem;
  problem.objective = testsupport::quadratic_norm_oracle(2);
  problem.A = Matrix::Identity(2, 2);
  problem.c = Vector::Zero(3);
  problem.blocks.push_back(PenaltyBlock::none(-Matrix::Identity(2, 2)));
  EXPECT_THROW(validate_problem(problem), DimensionMismatchError);
}

TEST(ProbeLipschitz, QuadraticCurvatureRecovered) {
  // f(x) = ||x||^2 has constant coordinate curvature 2.
  auto oracle = testsupport::quadratic_norm_oracle(4);
  const double probed = probe_lipschitz(*oracle, 100, 3);
  EXPECT_NEAR(probed, 1.5 * 2.0, 0.1);  // safety factor 1.5
}
