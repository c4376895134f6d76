#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "zoadmm/benchmarks.hpp"
#include "zoadmm/prescribe.hpp"
#include "zoadmm/solver.hpp"
#include "zoadmm/trace_csv.hpp"

namespace zoadmm {

// ---------------------------------------------------------------------------
// Problem construction from a declarative spec
// ---------------------------------------------------------------------------

struct ProblemSpec {
  std::string builder = "fused_lasso_synth";  // fused_lasso_synth | fused_lasso_libsvm | lasso_synth | group_split_synth
  std::string loss = "correntropy";           // correntropy | least_squares | logistic

  // synthetic data
  long n = 200;
  long d = 20;
  double sparsity = 0.2;
  double noise = 0.1;
  std::uint64_t data_seed = 1;

  // libsvm data
  std::string path;
  bool scale_features = false;

  double sigma = 1.0;  // correntropy width
  double tau1 = 1e-5;
  double tau2 = 1e-5;
  double graph_threshold = 0.3;

  std::vector<std::vector<int>> groups;
  long group_size = 0;
  long group_stride = 1;
  double tau_group = 1e-3;

  double lipschitz_override = 0.0;
};

struct BuiltProblem {
  ConstrainedProblem problem;
  ObjectiveModel model;
  std::string description;
  std::vector<int> degenerate_features;
};

inline ObjectiveModel build_loss(const ProblemSpec& spec, Dataset dataset) {
  if (spec.loss == "correntropy") return correntropy_oracle(std::move(dataset), spec.sigma);
  if (spec.loss == "least_squares") return least_squares_oracle(std::move(dataset));
  if (spec.loss == "logistic") return logistic_oracle(std::move(dataset));
  throw ConfigError("unknown loss '" + spec.loss + "'");
}

inline BuiltProblem build_problem(const ProblemSpec& spec) {
  Dataset dataset;
  if (spec.builder == "fused_lasso_libsvm") {
    if (spec.path.empty()) throw ConfigError("builder '" + spec.builder + "' needs a data path");
    dataset = load_libsvm(spec.path, spec.scale_features);
  } else if (spec.builder == "fused_lasso_synth" || spec.builder == "lasso_synth" ||
             spec.builder == "group_split_synth") {
    if (!spec.path.empty()) throw ConfigError("builder '" + spec.builder + "' does not take a data path");
    dataset = synth_dataset(spec.n, spec.d, spec.sparsity, spec.noise, spec.data_seed).first;
  } else {
    throw ConfigError("unknown problem builder '" + spec.builder + "'");
  }

  BuiltProblem built;
  std::ostringstream desc;
  desc << spec.builder << " n=" << dataset.n() << " d=" << dataset.d() << " loss=" << spec.loss;
  built.description = desc.str();

  if (spec.builder == "fused_lasso_synth" || spec.builder == "fused_lasso_libsvm") {
    GraphMatrix graph = build_graph(dataset, spec.graph_threshold);
    built.degenerate_features = graph.degenerate_features;
    built.model = build_loss(spec, std::move(dataset));
    if (spec.lipschitz_override > 0) built.model.lipschitz = spec.lipschitz_override;
    built.problem = build_fused_lasso_problem(built.model, graph, spec.tau1, spec.tau2);
  } else if (spec.builder == "lasso_synth") {
    built.model = build_loss(spec, std::move(dataset));
    if (spec.lipschitz_override > 0) built.model.lipschitz = spec.lipschitz_override;
    built.problem = build_lasso_problem(built.model, spec.tau1);
  } else {
    const int d = static_cast<int>(dataset.d());
    auto groups = spec.groups;
    if (groups.empty()) {
      if (spec.group_size < 1) throw ConfigError("group_split_synth needs groups or group_size");
      groups = make_group_windows(d, static_cast<int>(spec.group_size), static_cast<int>(spec.group_stride));
    }
    built.model = build_loss(spec, std::move(dataset));
    if (spec.lipschitz_override > 0) built.model.lipschitz = spec.lipschitz_override;
    built.problem = build_group_split_problem(built.model, groups, spec.tau_group);
  }
  return built;
}

// ---------------------------------------------------------------------------
// Run configuration (strict nested key-value file)
// ---------------------------------------------------------------------------

struct RunConfig {
  ProblemSpec problem;
  SolverConfig solver;
  bool prescribe = false;
  double alpha = 1.0;
  double l = 0.0;
  double kappa_g = 1.0;
  std::vector<std::uint64_t> seeds{1};
  std::string out_dir = ".";
};

namespace detail {

inline void check_keys(const nlohmann::json& obj, const std::string& scope,
                       std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw ConfigError("unknown config key '" + (scope.empty() ? item.key() : scope + "." + item.key()) + "'");
    }
  }
}

template <typename T>
void read_into(const nlohmann::json& obj, const char* key, T& out) {
  if (obj.contains(key)) {
    try {
      out = obj.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("config key '") + key + "' has the wrong type");
    }
  }
}

}  // namespace detail

inline ProblemSpec parse_problem_spec(const nlohmann::json& obj) {
  detail::check_keys(obj, "problem",
                     {"builder", "loss", "n", "d", "sparsity", "noise", "data_seed", "path", "scale_features",
                      "sigma", "tau1", "tau2", "graph_threshold", "groups", "group_size", "group_stride",
                      "tau_group", "lipschitz"});
  ProblemSpec spec;
  detail::read_into(obj, "builder", spec.builder);
  detail::read_into(obj, "loss", spec.loss);
  detail::read_into(obj, "n", spec.n);
  detail::read_into(obj, "d", spec.d);
  detail::read_into(obj, "sparsity", spec.sparsity);
  detail::read_into(obj, "noise", spec.noise);
  detail::read_into(obj, "data_seed", spec.data_seed);
  detail::read_into(obj, "path", spec.path);
  detail::read_into(obj, "scale_features", spec.scale_features);
  detail::read_into(obj, "sigma", spec.sigma);
  detail::read_into(obj, "tau1", spec.tau1);
  detail::read_into(obj, "tau2", spec.tau2);
  detail::read_into(obj, "graph_threshold", spec.graph_threshold);
  detail::read_into(obj, "groups", spec.groups);
  detail::read_into(obj, "group_size", spec.group_size);
  detail::read_into(obj, "group_stride", spec.group_stride);
  detail::read_into(obj, "tau_group", spec.tau_group);
  detail::read_into(obj, "lipschitz", spec.lipschitz_override);
  return spec;
}

inline RunConfig parse_run_config(const nlohmann::json& root) {
  detail::check_keys(root, "", {"problem", "solver", "seeds", "out"});
  RunConfig cfg;
  if (root.contains("problem")) cfg.problem = parse_problem_spec(root.at("problem"));

  if (root.contains("solver")) {
    const auto& s = root.at("solver");
    detail::check_keys(s, "solver",
                       {"variant", "iterations", "batch_size", "epoch_length", "eta", "rho", "r", "mu",
                        "output_rule", "max_evals", "gap_stride", "seed", "prescribe", "alpha", "l", "kappa_g",
                        "divergence_limit"});
    std::string variant = variant_name(cfg.solver.variant);
    detail::read_into(s, "variant", variant);
    cfg.solver.variant = parse_variant(variant);
    detail::read_into(s, "iterations", cfg.solver.iterations);
    detail::read_into(s, "batch_size", cfg.solver.batch_size);
    detail::read_into(s, "epoch_length", cfg.solver.epoch_length);
    detail::read_into(s, "eta", cfg.solver.eta);
    detail::read_into(s, "rho", cfg.solver.rho);
    detail::read_into(s, "r", cfg.solver.r);
    detail::read_into(s, "max_evals", cfg.solver.max_evals);
    detail::read_into(s, "gap_stride", cfg.solver.gap_stride);
    detail::read_into(s, "divergence_limit", cfg.solver.divergence_limit);
    if (s.contains("mu")) {
      const auto& mu = s.at("mu");
      detail::check_keys(mu, "solver.mu", {"kind", "mu0"});
      std::string kind = "decaying";
      double mu0 = 1.0;
      detail::read_into(mu, "kind", kind);
      detail::read_into(mu, "mu0", mu0);
      if (kind == "fixed") {
        cfg.solver.mu = SmoothingSchedule::fixed(mu0);
      } else if (kind == "decaying") {
        cfg.solver.mu = SmoothingSchedule::decaying(mu0);
      } else {
        throw ConfigError("unknown smoothing kind '" + kind + "'");
      }
    }
    if (s.contains("output_rule")) {
      std::string rule;
      detail::read_into(s, "output_rule", rule);
      cfg.solver.output_rule = parse_output_rule(rule);
    }
    detail::read_into(s, "prescribe", cfg.prescribe);
    detail::read_into(s, "alpha", cfg.alpha);
    detail::read_into(s, "l", cfg.l);
    detail::read_into(s, "kappa_g", cfg.kappa_g);
  }

  detail::read_into(root, "seeds", cfg.seeds);
  if (cfg.seeds.empty()) throw ConfigError("seeds must be nonempty");
  detail::read_into(root, "out", cfg.out_dir);
  return cfg;
}

inline RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  nlohmann::json root;
  try {
    in >> root;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(root);
}

// ---------------------------------------------------------------------------
// Command implementations (the CLI maps exceptions to exit codes)
// ---------------------------------------------------------------------------

struct SeedOutcome {
  std::uint64_t seed = 0;
  SolverResult result;
  std::string trace_path;
};

struct RunArtifacts {
  std::vector<SeedOutcome> runs;
  std::string summary_path;
};

/// Builds the problem once, then runs every seed and writes trace_<seed>.csv
/// plus one summary row per run under cfg.out_dir.
inline RunArtifacts execute_run(const RunConfig& cfg) {
  BuiltProblem built = build_problem(cfg.problem);

  SolverConfig solver = cfg.solver;
  if (cfg.prescribe) {
    const Prescription p =
        prescribe(built.problem.components(), built.problem.dim(), built.model.lipschitz, cfg.kappa_g,
                  built.problem.sigma_a_min, built.problem.sigma_a_max, cfg.alpha, cfg.l, solver.variant);
    apply_prescription(solver, p);
  }

  std::filesystem::create_directories(cfg.out_dir);
  RunArtifacts artifacts;
  artifacts.summary_path = (std::filesystem::path(cfg.out_dir) / "summary.csv").string();

  for (std::uint64_t seed : cfg.seeds) {
    SolverConfig per_seed = solver;
    per_seed.seed = seed;
    SolverResult result = run(built.problem, per_seed);

    SeedOutcome outcome;
    outcome.seed = seed;
    outcome.trace_path =
        (std::filesystem::path(cfg.out_dir) / ("trace_" + std::to_string(seed) + ".csv")).string();
    write_trace_csv(outcome.trace_path, result.trace);

    SummaryRow row;
    row.seed = seed;
    row.variant = variant_name(per_seed.variant);
    row.iterations = result.iterations_run;
    row.batch_size = per_seed.batch_size;
    row.epoch_length = result.geometry.epoch_length;
    row.eta = result.geometry.coeffs.eta;
    row.rho = result.geometry.coeffs.rho;
    row.r = result.geometry.coeffs.r;
    row.evals = result.opt_evals;
    row.diag_evals = result.diag_evals;
    row.objective = objective_value(built.problem, result.x, result.y);
    row.best_objective = row.objective;
    for (const auto& t : result.trace) row.best_objective = std::min(row.best_objective, t.objective);
    row.selected_iter = result.selected_iter;
    row.selected_theta = result.selected_theta;
    row.wall_s = result.trace.empty() ? 0.0 : result.trace.back().wall_s;
    append_summary_csv(artifacts.summary_path, row);

    outcome.result = std::move(result);
    artifacts.runs.push_back(std::move(outcome));
  }
  return artifacts;
}

// ---------------------------------------------------------------------------
// Gradient-bound checker
// ---------------------------------------------------------------------------

struct GradientCheckReport {
  int trials = 0;
  double mu = 0.0;
  double lipschitz = 0.0;
  double worst_error = 0.0;
  double bound = 0.0;  // L * mu / 2
  int worst_trial = -1;
  int worst_component = -1;
  bool ok = true;
};

/// Coordinate-estimate error against the analytic gradient of a builder
/// problem; checks the per-coordinate central-difference bound L*mu/2.
inline GradientCheckReport check_gradient(const ProblemSpec& spec, double mu, int trials,
                                          std::uint64_t seed = 12345) {
  if (!(mu > 0)) throw InvalidParameterError("mu must be positive");
  if (trials < 1) throw InvalidParameterError("trials must be at least 1");
  BuiltProblem built = build_problem(spec);
  const auto& oracle = *built.model.objective;

  GradientCheckReport report;
  report.trials = trials;
  report.mu = mu;
  report.lipschitz = built.model.lipschitz;
  report.bound = built.model.lipschitz * mu / 2.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, oracle.components() - 1);
  Vector x(oracle.dim());
  for (int trial = 0; trial < trials; ++trial) {
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = gauss(rng);
    const int i = pick(rng);
    const Vector est = estimate_component_gradient(oracle, i, x, mu);
    const Vector exact = built.model.gradient(i, x);
    const double err = (est - exact).cwiseAbs().maxCoeff();
    if (err > report.worst_error) {
      report.worst_error = err;
      report.worst_trial = trial;
      report.worst_component = i;
    }
  }
  report.ok = report.worst_error <= report.bound;
  return report;
}

// ---------------------------------------------------------------------------
// Desk-scale variance-reduction benchmark
// ---------------------------------------------------------------------------

struct BenchOptions {
  long n = 2000;
  long d = 50;
  double tau = 1e-5;
  double sigma = 1.0;
  double graph_threshold = 0.3;
  std::uint64_t data_seed = 7;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  long long budget = 2'000'000;  // optimization evaluations per run
  double eta = 0.0;              // 0 -> built-in default
  double rho = 0.0;
  int batch_size = 20;
  long epoch_length = 0;  // SVRG; 0 -> n / b
  std::string out_dir;    // empty -> no CSV output
};

struct BenchRun {
  std::uint64_t seed = 0;
  std::string variant;
  double final_objective = 0.0;
  long iterations = 0;
  long long evals = 0;
};

struct BenchOutcome {
  std::vector<BenchRun> runs;
  int svrg_wins = 0;
  int saga_wins = 0;
  int seeds_total = 0;
};

/// Equal-budget comparison of the two variance-reduced variants against the
/// plain stochastic baseline on the synthetic correntropy fused lasso.
/// A win means a strictly lower final objective at the shared budget.
inline BenchOutcome run_desk_benchmark(const BenchOptions& opts) {
  ProblemSpec spec;
  spec.builder = "fused_lasso_synth";
  spec.loss = "correntropy";
  spec.n = opts.n;
  spec.d = opts.d;
  spec.sigma = opts.sigma;
  spec.tau1 = opts.tau;
  spec.tau2 = opts.tau;
  spec.graph_threshold = opts.graph_threshold;
  spec.data_seed = opts.data_seed;
  BuiltProblem built = build_problem(spec);

  SolverConfig base;
  base.batch_size = opts.batch_size;
  base.mu = SmoothingSchedule::decaying();
  base.output_rule = OutputRule::Last;
  base.max_evals = opts.budget;
  // iteration cap well above what the budget admits; the budget is the stop
  base.iterations = static_cast<long>(opts.budget / (2LL * opts.d * opts.batch_size)) + 2;
  base.eta = opts.eta > 0 ? opts.eta : 5.0 / built.model.lipschitz;
  base.rho = opts.rho > 0 ? opts.rho : 0.05 * built.model.lipschitz;
  base.epoch_length = opts.epoch_length > 0 ? opts.epoch_length : std::max<long>(1, opts.n / opts.batch_size);
  base.gap_stride = base.iterations + 1;  // skip sampled full gradients here

  if (!opts.out_dir.empty()) std::filesystem::create_directories(opts.out_dir);

  BenchOutcome outcome;
  outcome.seeds_total = static_cast<int>(opts.seeds.size());
  for (std::uint64_t seed : opts.seeds) {
    double objective_by_variant[3] = {0, 0, 0};
    const Variant variants[3] = {Variant::ZoSgdAdmm, Variant::ZoSvrgAdmm, Variant::ZoSagaAdmm};
    for (int v = 0; v < 3; ++v) {
      SolverConfig cfg = base;
      cfg.variant = variants[v];
      cfg.seed = seed;
      SolverResult result = run(built.problem, cfg);
      BenchRun bench_run;
      bench_run.seed = seed;
      bench_run.variant = variant_name(cfg.variant);
      bench_run.final_objective = result.trace.empty() ? objective_value(built.problem, result.x, result.y)
                                                       : result.trace.back().objective;
      bench_run.iterations = result.iterations_run;
      bench_run.evals = result.opt_evals;
      objective_by_variant[v] = bench_run.final_objective;
      if (!opts.out_dir.empty()) {
        const std::string path = (std::filesystem::path(opts.out_dir) /
                                  ("bench_" + bench_run.variant + "_" + std::to_string(seed) + ".csv"))
                                     .string();
        write_trace_csv(path, result.trace);
      }
      outcome.runs.push_back(bench_run);
    }
    if (objective_by_variant[1] < objective_by_variant[0]) ++outcome.svrg_wins;
    if (objective_by_variant[2] < objective_by_variant[0]) ++outcome.saga_wins;
  }
  return outcome;
}

}  // namespace zoadmm
