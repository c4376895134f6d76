// Shared toy objectives and problem builders for the test suites.
#pragma once

#include <memory>
#include <random>

#include "zoadmm/benchmarks.hpp"
#include "zoadmm/problem.hpp"

namespace zoadmm::testsupport {

/// Single-component f(x) = ||x||^2.
inline ObjectivePtr quadratic_norm_oracle(int dim) {
  return std::make_shared<BlackBoxObjective>(1, dim, [](int, const Vector& x) { return x.squaredNorm(); });
}

/// f_i(x) = scale_i * ||x||^2.
inline ObjectivePtr scaled_norm_oracle(std::vector<double> scales, int dim) {
  auto data = std::make_shared<std::vector<double>>(std::move(scales));
  return std::make_shared<BlackBoxObjective>(static_cast<int>(data->size()), dim,
                                             [data](int i, const Vector& x) {
                                               return (*data)[static_cast<std::size_t>(i)] * x.squaredNorm();
                                             });
}

/// Smooth convex test instance: f_i(x) = 0.5 ||x - b_i||^2 with known
/// analytic mean gradient x - mean(b).
struct ShiftedQuadratic {
  ObjectivePtr oracle;
  Matrix shifts;  // n x d

  static ShiftedQuadratic make(int n, int d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto shifts = std::make_shared<Matrix>(n, d);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) (*shifts)(i, j) = gauss(rng);
    }
    ShiftedQuadratic out;
    out.shifts = *shifts;
    out.oracle = std::make_shared<BlackBoxObjective>(n, d, [shifts](int i, const Vector& x) {
      return 0.5 * (x - shifts->row(i).transpose()).squaredNorm();
    });
    return out;
  }
};

/// Lasso split around a quadratic oracle: A = I, B = -I, c = 0, psi = tau |.|_1.
inline ConstrainedProblem lasso_split(ObjectivePtr oracle, double tau, double lipschitz = 1.0) {
  const int d = oracle->dim();
  ConstrainedProblem problem;
  problem.objective = std::move(oracle);
  problem.lipschitz = lipschitz;
  problem.A = Matrix::Identity(d, d);
  problem.c = Vector::Zero(d);
  problem.blocks.push_back(PenaltyBlock::l1(tau, -Matrix::Identity(d, d)));
  validate_problem(problem);
  return problem;
}

inline Dataset random_dataset(int n, int d, std::uint64_t seed) {
  return synth_dataset(n, d, 0.5, 0.1, seed).first;
}

}  // namespace zoadmm::testsupport
