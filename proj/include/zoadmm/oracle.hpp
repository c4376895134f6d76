#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>

#include "zoadmm/common.hpp"

namespace zoadmm {

/// Finite-sum objective f(x) = (1/n) sum_i f_i(x) accessible only through
/// component function values. Every call to eval() bumps the shared counter,
/// which is the currency all evaluation budgets are accounted in.
class BlackBoxObjective {
 public:
  using ComponentFn = std::function<double(int, const Vector&)>;

  BlackBoxObjective(int components, int dim, ComponentFn fn)
      : n_(components), dim_(dim), fn_(std::move(fn)) {
    if (n_ < 1 || dim_ < 1) throw InvalidParameterError("objective needs n >= 1 and dim >= 1");
    if (!fn_) throw InvalidParameterError("objective needs a component function");
  }

  int components() const { return n_; }
  int dim() const { return dim_; }

  // Safe to call from concurrent workers; the component function itself must
  // be deterministic and thread-safe.
  double eval(int i, const Vector& x) const {
    count_.fetch_add(1, std::memory_order_relaxed);
    return fn_(i, x);
  }

  long long eval_count() const { return count_.load(std::memory_order_relaxed); }

 private:
  int n_;
  int dim_;
  ComponentFn fn_;
  mutable std::atomic<long long> count_{0};
};

using ObjectivePtr = std::shared_ptr<BlackBoxObjective>;

/// Smoothing parameter schedule for the finite-difference estimator. The
/// decaying schedule follows mu0 / (d * sqrt(t)) with t counted from 1.
struct SmoothingSchedule {
  enum class Kind { Fixed, Decaying };

  Kind kind = Kind::Fixed;
  double mu0 = 1e-3;

  static SmoothingSchedule fixed(double mu) {
    if (!(mu > 0)) throw InvalidParameterError("smoothing parameter must be positive");
    return SmoothingSchedule{Kind::Fixed, mu};
  }

  static SmoothingSchedule decaying(double scale = 1.0) {
    if (!(scale > 0)) throw InvalidParameterError("smoothing scale must be positive");
    return SmoothingSchedule{Kind::Decaying, scale};
  }

  double value(long t, int d) const {
    if (kind == Kind::Fixed) return mu0;
    const long tt = t < 1 ? 1 : t;
    return mu0 / (static_cast<double>(d) * std::sqrt(static_cast<double>(tt)));
  }
};

}  // namespace zoadmm
