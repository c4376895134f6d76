#pragma once

#include <cmath>

#include "zoadmm/solver.hpp"

namespace zoadmm {

struct Prescription {
  Variant variant = Variant::ZoSvrgAdmm;
  long m = 0;  // epoch length; SVRG only
  long b = 0;
  double eta = 0.0;
  double rho = 0.0;
  double r = 0.0;
  double sigma_g_min = 0.0;
  double sigma_g_max = 0.0;
  double kappa_g = 0.0;  // condition number of the resulting G
  SmoothingSchedule mu = SmoothingSchedule::decaying();
};

namespace detail {

inline long ceil_guarded(double v) { return static_cast<long>(std::ceil(v - 1e-9)); }

}  // namespace detail

/// Step-size, penalty and batch prescriptions for the variance-reduced
/// variants, parameterized by the dimension regime l in {0, 0.5, 1}:
///   SVRG: m = ceil(n^(1/3)), b = d^(1-l) n^(2/3),
///         eta = alpha sigma_min(G) / (9 d^l L), rho = 6 sqrt(71) kappa_G d^l L / (sigma_a_min alpha)
///   SAGA: b = n^(2/3) d^((1-l)/3),
///         eta = alpha sigma_min(G) / (33 d^l L), rho = 6 sqrt(791) kappa_G d^l L / (sigma_a_min alpha)
/// sigma_min(G) depends on eta through G = rI - rho eta A^T A, so it is
/// resolved with one fixed-point pass: eta is computed at the lower bound
/// sigma_min(G) = 1 (G is kept above the identity), then the spectrum of the
/// resulting G is reported.
inline Prescription prescribe(long n, long d, double L, double kappa_g, double sigma_a_min, double sigma_a_max,
                              double alpha, double l, Variant variant) {
  if (!(alpha > 0.0) || alpha > 1.0) throw InvalidParameterError("alpha must lie in (0, 1]");
  if (l != 0.0 && l != 0.5 && l != 1.0) throw InvalidParameterError("l must be one of 0, 0.5, 1");
  if (!(L > 0)) throw InvalidParameterError("Lipschitz constant must be positive");
  if (n < 1 || d < 1) throw InvalidParameterError("n and d must be at least 1");
  if (!(sigma_a_min > 0)) throw InvalidParameterError("sigma_a_min must be positive");
  if (sigma_a_max <= 0) sigma_a_max = sigma_a_min;
  if (kappa_g < 1.0) throw InvalidParameterError("kappa_g must be at least 1");
  if (variant != Variant::ZoSvrgAdmm && variant != Variant::ZoSagaAdmm) {
    throw InvalidParameterError("prescriptions are defined for the SVRG and SAGA variants");
  }

  const double dl = std::pow(static_cast<double>(d), l);
  const double n13 = std::cbrt(static_cast<double>(n));
  const double n23 = n13 * n13;

  Prescription out;
  out.variant = variant;
  if (variant == Variant::ZoSvrgAdmm) {
    out.m = detail::ceil_guarded(n13);
    out.b = std::min<long>(n, detail::ceil_guarded(std::pow(static_cast<double>(d), 1.0 - l) * n23));
    out.eta = alpha / (9.0 * dl * L);
    out.rho = 6.0 * std::sqrt(71.0) * kappa_g * dl * L / (sigma_a_min * alpha);
  } else {
    out.b = std::min<long>(n, detail::ceil_guarded(n23 * std::pow(static_cast<double>(d), (1.0 - l) / 3.0)));
    out.eta = alpha / (33.0 * dl * L);
    out.rho = 6.0 * std::sqrt(791.0) * kappa_g * dl * L / (sigma_a_min * alpha);
  }
  if (out.b < 1) out.b = 1;
  if (out.m < 1 && variant == Variant::ZoSvrgAdmm) out.m = 1;

  out.r = 1.01 * (out.rho * out.eta * sigma_a_max + 1.0);
  out.sigma_g_min = out.r - out.rho * out.eta * sigma_a_max;
  out.sigma_g_max = out.r - out.rho * out.eta * sigma_a_min;
  out.kappa_g = out.sigma_g_max / out.sigma_g_min;
  out.mu = SmoothingSchedule::decaying();
  return out;
}

/// Copies a prescription into a solver configuration.
inline void apply_prescription(SolverConfig& cfg, const Prescription& p) {
  cfg.variant = p.variant;
  cfg.eta = p.eta;
  cfg.rho = p.rho;
  cfg.r = p.r;
  cfg.batch_size = static_cast<int>(p.b);
  if (p.variant == Variant::ZoSvrgAdmm) cfg.epoch_length = p.m;
  cfg.mu = p.mu;
}

}  // namespace zoadmm
