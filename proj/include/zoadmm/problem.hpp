#pragma once

#include <Eigen/SVD>

#include <random>
#include <sstream>
#include <vector>

#include "zoadmm/oracle.hpp"
#include "zoadmm/penalty.hpp"

namespace zoadmm {

/// Linearly constrained composite problem
///   min (1/n) sum_i f_i(x) + sum_j psi_j(y_j)   s.t.  A x + sum_j B_j y_j = c
/// with the smooth part reachable only through the black-box oracle.
/// sigma_a_min / sigma_a_max are the extreme eigenvalues of A^T A, filled in
/// by validate_problem. A must have full column rank.
struct ConstrainedProblem {
  ObjectivePtr objective;
  std::vector<PenaltyBlock> blocks;
  Matrix A;
  Vector c;
  double lipschitz = 1.0;

  double sigma_a_min = 0.0;
  double sigma_a_max = 0.0;

  int dim() const { return objective ? objective->dim() : 0; }
  int components() const { return objective ? objective->components() : 0; }
  Eigen::Index rows() const { return A.rows(); }

  /// A x + sum_j B_j y_j - c
  Vector constraint_residual(const Vector& x, const std::vector<Vector>& y) const {
    Vector res = A * x - c;
    for (std::size_t j = 0; j < blocks.size(); ++j) res += blocks[j].constraint() * y[j];
    return res;
  }

  std::vector<Vector> zero_blocks() const {
    std::vector<Vector> y;
    y.reserve(blocks.size());
    for (const auto& b : blocks) y.push_back(Vector::Zero(b.dim()));
    return y;
  }
};

struct ValidationReport {
  double sigma_a_min = 0.0;  // smallest eigenvalue of A^T A
  double sigma_a_max = 0.0;  // largest eigenvalue of A^T A
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<Eigen::Index> block_dims;
};

/// Checks dimensions and the full-column-rank requirement on A, and caches
/// the spectrum of A^T A on the problem. Throws RankDeficientError when the
/// smallest singular value of A falls below 1e-10 times the largest, and
/// DimensionMismatchError naming the offending block.
inline ValidationReport validate_problem(ConstrainedProblem& problem) {
  if (!problem.objective) throw InvalidParameterError("problem has no objective");
  if (problem.blocks.empty()) throw InvalidParameterError("problem needs at least one penalty block");

  const Eigen::Index p = problem.A.rows();
  const Eigen::Index d = problem.A.cols();
  if (d != problem.objective->dim()) {
    std::ostringstream msg;
    msg << "A has " << d << " columns but the oracle dimension is " << problem.objective->dim();
    throw DimensionMismatchError(msg.str());
  }
  if (problem.c.size() != p) {
    std::ostringstream msg;
    msg << "c has length " << problem.c.size() << " but A has " << p << " rows";
    throw DimensionMismatchError(msg.str());
  }

  ValidationReport report;
  report.rows = p;
  report.cols = d;
  for (std::size_t j = 0; j < problem.blocks.size(); ++j) {
    const Matrix& B = problem.blocks[j].constraint();
    if (B.rows() != p) {
      std::ostringstream msg;
      msg << "block " << j << ": B has " << B.rows() << " rows, expected " << p;
      throw DimensionMismatchError(msg.str());
    }
    report.block_dims.push_back(B.cols());
  }

  Eigen::JacobiSVD<Matrix> svd(problem.A);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv[0] : 0.0;
  const double smin = sv.size() > 0 ? sv[sv.size() - 1] : 0.0;
  if (p < d || smin < 1e-10 * smax || smax == 0.0) {
    std::ostringstream msg;
    msg << "A is rank deficient (singular values in [" << smin << ", " << smax << "], " << p << "x" << d
        << "); a full column rank constraint matrix is required";
    throw RankDeficientError(msg.str());
  }

  report.sigma_a_min = smin * smin;
  report.sigma_a_max = smax * smax;
  problem.sigma_a_min = report.sigma_a_min;
  problem.sigma_a_max = report.sigma_a_max;
  return report;
}

/// Heuristic smoothness probe for oracles without a certified constant:
/// the largest |f_i(x+de_j) - 2 f_i(x) + f_i(x-de_j)| / d^2 observed over
/// random components, points and coordinates, times a safety factor. Only a
/// lower bound in general; prefer a certified constant where one exists.
inline double probe_lipschitz(const BlackBoxObjective& oracle, int trials = 200, std::uint64_t seed = 0,
                              double delta = 1e-3, double safety = 1.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick_i(0, oracle.components() - 1);
  std::uniform_int_distribution<int> pick_j(0, oracle.dim() - 1);

  double worst = 0.0;
  Vector x(oracle.dim());
  for (int trial = 0; trial < trials; ++trial) {
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = gauss(rng);
    const int i = pick_i(rng);
    const int j = pick_j(rng);
    const double mid = oracle.eval(i, x);
    const double saved = x[j];
    x[j] = saved + delta;
    const double hi = oracle.eval(i, x);
    x[j] = saved - delta;
    const double lo = oracle.eval(i, x);
    x[j] = saved;
    const double curv = std::abs(hi - 2.0 * mid + lo) / (delta * delta);
    if (std::isfinite(curv) && curv > worst) worst = curv;
  }
  return safety * worst;
}

}  // namespace zoadmm
