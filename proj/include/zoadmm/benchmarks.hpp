#pragma once

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "zoadmm/problem.hpp"

namespace zoadmm {

// ---------------------------------------------------------------------------
// Data
// ---------------------------------------------------------------------------

struct Dataset {
  SparseRowMatrix features;  // n x d
  Vector labels;             // entries in {-1, +1}
  std::string name;

  Eigen::Index n() const { return features.rows(); }
  Eigen::Index d() const { return features.cols(); }

  double max_row_sq_norm() const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < features.rows(); ++i) {
      double acc = 0.0;
      for (SparseRowMatrix::InnerIterator it(features, i); it; ++it) acc += it.value() * it.value();
      worst = std::max(worst, acc);
    }
    return worst;
  }
};

/// Edge-difference operator over the feature graph: one row per edge with +1
/// and -1 in the endpoint columns.
struct GraphMatrix {
  SparseRowMatrix rows;                      // e x d
  std::vector<std::pair<int, int>> edges;    // (i, j) with i < j
  std::vector<int> degenerate_features;      // zero-variance columns, excluded

  Eigen::Index edge_count() const { return rows.rows(); }
  Eigen::Index dim() const { return rows.cols(); }
  Matrix dense() const { return Matrix(rows); }
};

/// Oracle plus the certified smoothness constant of its gradient and an
/// analytic gradient used only by verification paths.
struct ObjectiveModel {
  ObjectivePtr objective;
  double lipschitz = 0.0;
  std::function<Vector(int, const Vector&)> gradient;
  std::string loss;
};

namespace detail {

inline Vector sparse_row_vector(const SparseRowMatrix& mat, Eigen::Index i, double scale) {
  Vector out = Vector::Zero(mat.cols());
  for (SparseRowMatrix::InnerIterator it(mat, i); it; ++it) out[it.col()] = scale * it.value();
  return out;
}

inline double sparse_row_dot(const SparseRowMatrix& mat, Eigen::Index i, const Vector& x) {
  double acc = 0.0;
  for (SparseRowMatrix::InnerIterator it(mat, i); it; ++it) acc += it.value() * x[it.col()];
  return acc;
}

// Coarse grid plus golden-section refinement of max |fn| over [lo, hi].
inline double max_abs_on_interval(const std::function<double(double)>& fn, double lo, double hi, int grid = 2001) {
  double best_x = lo;
  double best = 0.0;
  for (int i = 0; i < grid; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(grid - 1);
    const double v = std::abs(fn(x));
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  const double span = (hi - lo) / static_cast<double>(grid - 1);
  double a = best_x - span, b = best_x + span;
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double c1 = b - phi * (b - a);
    const double c2 = a + phi * (b - a);
    if (std::abs(fn(c1)) >= std::abs(fn(c2))) {
      b = c2;
    } else {
      a = c1;
    }
  }
  return std::max(best, std::abs(fn((a + b) / 2.0)));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Loss oracles
// ---------------------------------------------------------------------------

/// Bounded nonconvex robust loss f_i(x) = (sigma^2/2)(1 - exp(-(l_i - a_i^T x)^2 / sigma^2)).
/// The certified smoothness constant is max_r |phi''(r)| * max_i ||a_i||^2
/// with the 1-D maximum located numerically.
inline ObjectiveModel correntropy_oracle(Dataset dataset, double sigma = 1.0) {
  if (!(sigma > 0)) throw InvalidParameterError("correntropy sigma must be positive");
  auto data = std::make_shared<Dataset>(std::move(dataset));
  const double s2 = sigma * sigma;

  auto second_derivative = [s2](double r) { return std::exp(-r * r / s2) * (1.0 - 2.0 * r * r / s2); };
  const double curve_max = detail::max_abs_on_interval(second_derivative, -6.0 * sigma, 6.0 * sigma);

  ObjectiveModel model;
  model.loss = "correntropy";
  model.lipschitz = curve_max * data->max_row_sq_norm();
  model.objective = std::make_shared<BlackBoxObjective>(
      static_cast<int>(data->n()), static_cast<int>(data->d()), [data, s2](int i, const Vector& x) {
        const double r = data->labels[i] - detail::sparse_row_dot(data->features, i, x);
        return 0.5 * s2 * (1.0 - std::exp(-r * r / s2));
      });
  model.gradient = [data, s2](int i, const Vector& x) {
    const double r = data->labels[i] - detail::sparse_row_dot(data->features, i, x);
    return detail::sparse_row_vector(data->features, i, -r * std::exp(-r * r / s2));
  };
  return model;
}

/// f_i(x) = (1/2)(a_i^T x - l_i)^2; smoothness constant max_i ||a_i||^2.
inline ObjectiveModel least_squares_oracle(Dataset dataset) {
  auto data = std::make_shared<Dataset>(std::move(dataset));
  ObjectiveModel model;
  model.loss = "least_squares";
  model.lipschitz = data->max_row_sq_norm();
  model.objective = std::make_shared<BlackBoxObjective>(
      static_cast<int>(data->n()), static_cast<int>(data->d()), [data](int i, const Vector& x) {
        const double r = detail::sparse_row_dot(data->features, i, x) - data->labels[i];
        return 0.5 * r * r;
      });
  model.gradient = [data](int i, const Vector& x) {
    const double r = detail::sparse_row_dot(data->features, i, x) - data->labels[i];
    return detail::sparse_row_vector(data->features, i, r);
  };
  return model;
}

/// f_i(x) = log(1 + exp(-l_i a_i^T x)); smoothness constant max_i ||a_i||^2 / 4.
inline ObjectiveModel logistic_oracle(Dataset dataset) {
  auto data = std::make_shared<Dataset>(std::move(dataset));
  ObjectiveModel model;
  model.loss = "logistic";
  model.lipschitz = 0.25 * data->max_row_sq_norm();
  model.objective = std::make_shared<BlackBoxObjective>(
      static_cast<int>(data->n()), static_cast<int>(data->d()), [data](int i, const Vector& x) {
        const double z = -data->labels[i] * detail::sparse_row_dot(data->features, i, x);
        return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
      });
  model.gradient = [data](int i, const Vector& x) {
    const double z = -data->labels[i] * detail::sparse_row_dot(data->features, i, x);
    const double sig = 1.0 / (1.0 + std::exp(-z));
    return detail::sparse_row_vector(data->features, i, -data->labels[i] * sig);
  };
  return model;
}

// ---------------------------------------------------------------------------
// Problem builders
// ---------------------------------------------------------------------------

/// Plain lasso splitting: x - y = 0 with psi = tau1 ||y||_1 (A = I, B = -I).
inline ConstrainedProblem build_lasso_problem(const ObjectiveModel& model, double tau1) {
  const int d = model.objective->dim();
  ConstrainedProblem problem;
  problem.objective = model.objective;
  problem.lipschitz = model.lipschitz;
  problem.A = Matrix::Identity(d, d);
  problem.c = Vector::Zero(d);
  problem.blocks.push_back(PenaltyBlock::l1(tau1, -Matrix::Identity(d, d)));
  validate_problem(problem);
  return problem;
}

/// Graph-guided fused lasso splitting of
///   min f(x) + tau1 ||x||_1 + tau2 ||G x||_1
/// as y1 = x, y2 = G x: A = [I; G] stacked, B1 = [-I; 0], B2 = [0; -I], c = 0.
/// A keeps full column rank through the identity block. With no edges this
/// degenerates to the plain lasso splitting.
inline ConstrainedProblem build_fused_lasso_problem(const ObjectiveModel& model, const GraphMatrix& graph,
                                                    double tau1, double tau2) {
  const int d = model.objective->dim();
  if (graph.dim() != d) {
    throw DimensionMismatchError("graph is over " + std::to_string(graph.dim()) + " features, expected " +
                                 std::to_string(d));
  }
  const Eigen::Index e = graph.edge_count();
  if (e == 0) return build_lasso_problem(model, tau1);

  const Eigen::Index p = d + e;
  ConstrainedProblem problem;
  problem.objective = model.objective;
  problem.lipschitz = model.lipschitz;
  problem.A = Matrix::Zero(p, d);
  problem.A.topRows(d) = Matrix::Identity(d, d);
  problem.A.bottomRows(e) = graph.dense();
  problem.c = Vector::Zero(p);

  Matrix b1 = Matrix::Zero(p, d);
  b1.topRows(d) = -Matrix::Identity(d, d);
  Matrix b2 = Matrix::Zero(p, e);
  b2.bottomRows(e) = -Matrix::Identity(e, e);
  problem.blocks.push_back(PenaltyBlock::l1(tau1, std::move(b1)));
  problem.blocks.push_back(PenaltyBlock::l1(tau2, std::move(b2)));
  validate_problem(problem);
  return problem;
}

/// Overlapping-group splitting: one block per group g with S_g x - y_g = 0
/// and psi_g = tau_g ||y_g||_2. The groups must cover every coordinate or the
/// stacked selection matrix loses column rank.
inline ConstrainedProblem build_group_split_problem(const ObjectiveModel& model,
                                                    const std::vector<std::vector<int>>& groups, double tau_g) {
  const int d = model.objective->dim();
  if (groups.empty()) throw CoverageError("need at least one group");
  std::vector<bool> covered(static_cast<std::size_t>(d), false);
  Eigen::Index p = 0;
  for (const auto& g : groups) {
    if (g.empty()) throw CoverageError("groups must be nonempty");
    for (int idx : g) {
      if (idx < 0 || idx >= d) throw CoverageError("group index " + std::to_string(idx) + " out of range");
      covered[static_cast<std::size_t>(idx)] = true;
    }
    p += static_cast<Eigen::Index>(g.size());
  }
  for (int j = 0; j < d; ++j) {
    if (!covered[static_cast<std::size_t>(j)]) {
      throw CoverageError("groups do not cover coordinate " + std::to_string(j));
    }
  }

  ConstrainedProblem problem;
  problem.objective = model.objective;
  problem.lipschitz = model.lipschitz;
  problem.A = Matrix::Zero(p, d);
  problem.c = Vector::Zero(p);
  Eigen::Index row = 0;
  for (const auto& g : groups) {
    const auto q = static_cast<Eigen::Index>(g.size());
    Matrix b = Matrix::Zero(p, q);
    for (Eigen::Index local = 0; local < q; ++local) {
      problem.A(row + local, g[static_cast<std::size_t>(local)]) = 1.0;
      b(row + local, local) = -1.0;
    }
    problem.blocks.push_back(PenaltyBlock::group_l2(tau_g, std::move(b)));
    row += q;
  }
  validate_problem(problem);
  return problem;
}

/// Sliding 1-D windows covering [0, d): size `size`, step `stride`, with the
/// last window clamped to the tail.
inline std::vector<std::vector<int>> make_group_windows(int d, int size, int stride) {
  if (size < 1 || stride < 1 || size > d) throw InvalidParameterError("bad group window shape");
  std::vector<std::vector<int>> groups;
  for (int start = 0;; start += stride) {
    if (start + size > d) start = d - size;
    std::vector<int> g(static_cast<std::size_t>(size));
    std::iota(g.begin(), g.end(), start);
    groups.push_back(std::move(g));
    if (start + size >= d) break;
  }
  return groups;
}

// ---------------------------------------------------------------------------
// Data handling
// ---------------------------------------------------------------------------

/// Reads "label idx:val idx:val ..." lines with ascending 1-based indices.
/// Labels map to {-1, +1}: zero and negatives go to -1, positives to +1.
/// Transparently decompresses gzip input (zlib reads plain files too).
inline Dataset load_libsvm(const std::string& path, bool scale_features = false) {
  gzFile file = gzopen(path.c_str(), "rb");
  if (file == nullptr) throw IoError("cannot open '" + path + "'");

  std::vector<Eigen::Triplet<double>> entries;
  std::vector<double> labels;
  int max_index = 0;
  long line_no = 0;
  std::string line;
  std::vector<char> buf(1 << 16);

  auto fail = [&](const std::string& what) {
    gzclose(file);
    throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
  };

  bool eof = false;
  while (!eof) {
    line.clear();
    for (;;) {
      if (gzgets(file, buf.data(), static_cast<int>(buf.size())) == nullptr) {
        eof = true;
        break;
      }
      line += buf.data();
      if (!line.empty() && line.back() == '\n') break;
    }
    if (line.empty()) continue;
    ++line_no;
    if (line.find_first_not_of(" \t\r\n") == std::string::npos) continue;  // blank line

    const char* p = line.c_str();
    char* end = nullptr;
    const double raw_label = std::strtod(p, &end);
    if (end == p) fail("missing label");
    labels.push_back(raw_label > 0 ? 1.0 : -1.0);

    p = end;
    int prev_index = 0;
    for (;;) {
      while (*p == ' ' || *p == '\t') ++p;
      if (*p == '\0' || *p == '\n' || *p == '\r' || *p == '#') break;
      const long index = std::strtol(p, &end, 10);
      if (end == p || *end != ':') fail("expected idx:val pair");
      if (index < 1) fail("indices are 1-based");
      if (index <= prev_index) {
        gzclose(file);
        throw ParseError(path + ":" + std::to_string(line_no) + ": non-ascending feature index " +
                         std::to_string(index));
      }
      p = end + 1;
      const double value = std::strtod(p, &end);
      if (end == p) fail("missing feature value");
      if (!std::isfinite(value)) fail("non-finite feature value");
      p = end;
      prev_index = static_cast<int>(index);
      max_index = std::max(max_index, prev_index);
      entries.emplace_back(static_cast<int>(labels.size()) - 1, prev_index - 1, value);
    }
  }
  gzclose(file);

  if (labels.empty() || max_index == 0) throw ParseError(path + ": no samples");

  Dataset out;
  out.name = path;
  out.features.resize(static_cast<Eigen::Index>(labels.size()), max_index);
  out.features.setFromTriplets(entries.begin(), entries.end());
  out.labels = Eigen::Map<Vector>(labels.data(), static_cast<Eigen::Index>(labels.size()));

  if (scale_features) {
    Vector col_max = Vector::Zero(out.features.cols());
    for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
      for (SparseRowMatrix::InnerIterator it(out.features, i); it; ++it) {
        col_max[it.col()] = std::max(col_max[it.col()], std::abs(it.value()));
      }
    }
    for (Eigen::Index i = 0; i < out.features.rows(); ++i) {
      for (SparseRowMatrix::InnerIterator it(out.features, i); it; ++it) {
        if (col_max[it.col()] > 0) it.valueRef() /= col_max[it.col()];
      }
    }
  }
  return out;
}

/// Gaussian design with a planted sparse separator: rows are standard normal,
/// x* has ceil(sparsity*d) nonzero coordinates, labels are
/// sign(a_i^T x* + noise * eps_i). Deterministic for a fixed seed.
inline std::pair<Dataset, Vector> synth_dataset(long n, long d, double sparsity, double noise, std::uint64_t seed) {
  if (n < 1 || d < 1) throw InvalidParameterError("synthetic dataset needs n, d >= 1");
  if (sparsity < 0 || sparsity > 1) throw InvalidParameterError("sparsity must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Matrix dense(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) dense(i, j) = gauss(rng);
  }

  const long support = std::min<long>(d, static_cast<long>(std::ceil(sparsity * static_cast<double>(d))));
  std::vector<int> order(static_cast<std::size_t>(d));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Vector planted = Vector::Zero(d);
  for (long s = 0; s < support; ++s) planted[order[static_cast<std::size_t>(s)]] = gauss(rng);

  Dataset out;
  out.name = "synthetic";
  out.labels.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double margin = dense.row(i).dot(planted) + noise * gauss(rng);
    out.labels[i] = margin >= 0 ? 1.0 : -1.0;
  }
  out.features = dense.sparseView();
  out.features.makeCompressed();
  return {std::move(out), std::move(planted)};
}

/// Correlation-threshold feature graph: edge (i, j) present iff
/// |corr(col_i, col_j)| >= threshold. Zero-variance features are excluded
/// from edges and reported in degenerate_features.
inline GraphMatrix build_graph(const Dataset& dataset, double threshold) {
  if (!(threshold > 0) || !(threshold < 1)) throw InvalidParameterError("graph threshold must lie in (0, 1)");
  const Eigen::Index n = dataset.n();
  const Eigen::Index d = dataset.d();

  Matrix cols(dataset.features);
  Vector mean = cols.colwise().mean();
  Matrix centered = cols.rowwise() - mean.transpose();
  Vector sd(d);
  GraphMatrix graph;
  for (Eigen::Index j = 0; j < d; ++j) {
    sd[j] = std::sqrt(centered.col(j).squaredNorm() / static_cast<double>(n));
    if (sd[j] == 0.0) graph.degenerate_features.push_back(static_cast<int>(j));
  }

  std::vector<Eigen::Triplet<double>> entries;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (sd[i] == 0.0) continue;
    for (Eigen::Index j = i + 1; j < d; ++j) {
      if (sd[j] == 0.0) continue;
      const double corr = centered.col(i).dot(centered.col(j)) / (static_cast<double>(n) * sd[i] * sd[j]);
      if (std::abs(corr) >= threshold) {
        const int row = static_cast<int>(graph.edges.size());
        graph.edges.emplace_back(static_cast<int>(i), static_cast<int>(j));
        entries.emplace_back(row, static_cast<int>(i), 1.0);
        entries.emplace_back(row, static_cast<int>(j), -1.0);
      }
    }
  }
  graph.rows.resize(static_cast<Eigen::Index>(graph.edges.size()), d);
  graph.rows.setFromTriplets(entries.begin(), entries.end());
  return graph;
}

}  // namespace zoadmm
