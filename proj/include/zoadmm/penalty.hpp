#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include "zoadmm/common.hpp"

namespace zoadmm {

/// Soft threshold: componentwise sign(v_i) * max(|v_i| - tau, 0).
inline Vector prox_l1(const Vector& v, double tau) {
  if (!(tau > 0)) throw InvalidParameterError("prox_l1: tau must be positive");
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - tau;
    out[i] = a > 0 ? (v[i] > 0 ? a : -a) : 0.0;
  }
  return out;
}

/// Block shrinkage: v * max(1 - tau/||v||, 0); zero when ||v|| <= tau.
inline Vector prox_group_l2(const Vector& v, double tau) {
  if (!(tau > 0)) throw InvalidParameterError("prox_group_l2: tau must be positive");
  const double norm = v.norm();
  if (norm <= tau) return Vector::Zero(v.size());
  return v * (1.0 - tau / norm);
}

/// One convex nonsmooth penalty psi_j together with its constraint matrix B_j
/// and proximal map prox(v, tau) = argmin_y psi(y) + ||y - v||^2 / (2 tau).
/// Penalties without a closed-form prox are not representable on purpose:
/// the y-updates in the solver are single prox calls.
class PenaltyBlock {
 public:
  using PsiFn = std::function<double(const Vector&)>;
  using ProxFn = std::function<Vector(const Vector&, double)>;

  PenaltyBlock(Matrix constraint, PsiFn psi, ProxFn prox, std::string name)
      : B_(std::move(constraint)), psi_(std::move(psi)), prox_(std::move(prox)), name_(std::move(name)) {
    if (!psi_ || !prox_) throw InvalidParameterError("penalty block needs psi and prox");
  }

  /// weight * ||y||_1
  static PenaltyBlock l1(double weight, Matrix constraint) {
    if (weight < 0) throw InvalidParameterError("l1 weight must be nonnegative");
    if (weight == 0) return none(std::move(constraint));
    return PenaltyBlock(
        std::move(constraint),
        [weight](const Vector& y) { return weight * y.lpNorm<1>(); },
        [weight](const Vector& v, double tau) { return prox_l1(v, weight * tau); }, "l1");
  }

  /// weight * ||y||_2 (unsquared group norm)
  static PenaltyBlock group_l2(double weight, Matrix constraint) {
    if (weight < 0) throw InvalidParameterError("group weight must be nonnegative");
    if (weight == 0) return none(std::move(constraint));
    return PenaltyBlock(
        std::move(constraint),
        [weight](const Vector& y) { return weight * y.norm(); },
        [weight](const Vector& v, double tau) { return prox_group_l2(v, weight * tau); }, "group_l2");
  }

  /// psi = 0; prox is the identity.
  static PenaltyBlock none(Matrix constraint) {
    return PenaltyBlock(
        std::move(constraint), [](const Vector&) { return 0.0; },
        [](const Vector& v, double) { return v; }, "none");
  }

  const Matrix& constraint() const { return B_; }
  Eigen::Index dim() const { return B_.cols(); }
  const std::string& name() const { return name_; }

  double psi(const Vector& y) const { return psi_(y); }

  Vector prox(const Vector& v, double tau) const {
    if (!(tau > 0)) throw InvalidParameterError("prox: tau must be positive");
    return prox_(v, tau);
  }

 private:
  Matrix B_;
  PsiFn psi_;
  ProxFn prox_;
  std::string name_;
};

}  // namespace zoadmm
