// Batch front-end for the zeroth-order ADMM solvers: configure runs, sweep
// seeds, emit CSV traces, print theorem-style parameter prescriptions, and
// check the gradient-estimator bound against analytic gradients.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "zoadmm/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitDiverged = 3;
constexpr int kExitIo = 4;
constexpr int kExitBoundViolated = 5;

std::vector<std::uint64_t> parse_seed_list(const std::string& csv) {
  std::vector<std::uint64_t> seeds;
  std::size_t pos = 0;
  while (pos < csv.size()) {
    std::size_t next = csv.find(',', pos);
    if (next == std::string::npos) next = csv.size();
    const std::string token = csv.substr(pos, next - pos);
    if (!token.empty()) seeds.push_back(std::stoull(token));
    pos = next + 1;
  }
  if (seeds.empty()) throw zoadmm::ConfigError("seed list is empty");
  return seeds;
}

int cmd_run(const std::string& config_path, const std::string& out_override, const std::string& seeds_override,
            const std::string& variant_override) {
  zoadmm::RunConfig cfg = zoadmm::load_run_config(config_path);
  if (!out_override.empty()) cfg.out_dir = out_override;
  if (!seeds_override.empty()) cfg.seeds = parse_seed_list(seeds_override);
  if (!variant_override.empty()) cfg.solver.variant = zoadmm::parse_variant(variant_override);

  const zoadmm::RunArtifacts artifacts = zoadmm::execute_run(cfg);
  for (const auto& outcome : artifacts.runs) {
    const auto& trace = outcome.result.trace;
    std::printf("seed %llu: %ld iterations, %lld evals (+%lld diagnostic), objective %.6g -> %s\n",
                static_cast<unsigned long long>(outcome.seed), outcome.result.iterations_run,
                outcome.result.opt_evals, outcome.result.diag_evals,
                trace.empty() ? 0.0 : trace.back().objective, outcome.trace_path.c_str());
  }
  std::printf("summary: %s\n", artifacts.summary_path.c_str());
  return kExitOk;
}

int cmd_prescribe(long n, long d, double lipschitz, double alpha, double l, const std::string& variant,
                  double kappa_g, double sigma_a_min, double sigma_a_max) {
  const zoadmm::Prescription p = zoadmm::prescribe(n, d, lipschitz, kappa_g, sigma_a_min, sigma_a_max, alpha, l,
                                                   zoadmm::parse_variant(variant));
  if (p.variant == zoadmm::Variant::ZoSvrgAdmm) std::printf("m: %ld\n", p.m);
  std::printf("b: %ld\n", p.b);
  std::printf("eta: %.12g\n", p.eta);
  std::printf("rho: %.12g\n", p.rho);
  std::printf("r: %.12g\n", p.r);
  std::printf("sigma_min_G: %.12g\n", p.sigma_g_min);
  std::printf("sigma_max_G: %.12g\n", p.sigma_g_max);
  std::printf("kappa_G: %.12g\n", p.kappa_g);
  std::printf("mu: decaying 1/(d*sqrt(t))\n");
  return kExitOk;
}

int cmd_check_gradient(const zoadmm::ProblemSpec& spec, double mu, int trials) {
  const zoadmm::GradientCheckReport report = zoadmm::check_gradient(spec, mu, trials);
  std::printf("trials: %d\n", report.trials);
  std::printf("mu: %.6g\n", report.mu);
  std::printf("lipschitz: %.12g\n", report.lipschitz);
  std::printf("bound (L*mu/2): %.12g\n", report.bound);
  std::printf("max coordinate error: %.12g\n", report.worst_error);
  if (!report.ok) {
    std::printf("VIOLATION at trial %d component %d: error %.12g > bound %.12g\n", report.worst_trial,
                report.worst_component, report.worst_error, report.bound);
    return kExitBoundViolated;
  }
  std::printf("all trials within bound\n");
  return kExitOk;
}

int cmd_bench(const zoadmm::BenchOptions& opts) {
  const zoadmm::BenchOutcome outcome = zoadmm::run_desk_benchmark(opts);
  std::printf("%-14s %6s %16s %12s %12s\n", "variant", "seed", "final_objective", "iterations", "evals");
  for (const auto& run : outcome.runs) {
    std::printf("%-14s %6llu %16.8g %12ld %12lld\n", run.variant.c_str(),
                static_cast<unsigned long long>(run.seed), run.final_objective, run.iterations, run.evals);
  }
  std::printf("zo-svrg-admm beats zo-sgd-admm on %d/%d seeds\n", outcome.svrg_wins, outcome.seeds_total);
  std::printf("zo-saga-admm beats zo-sgd-admm on %d/%d seeds\n", outcome.saga_wins, outcome.seeds_total);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zeroth-order stochastic ADMM solver"};
  app.require_subcommand(1);

  // run
  auto* run_cmd = app.add_subcommand("run", "run a configured experiment over one or more seeds");
  std::string config_path, out_override, seeds_override, variant_override;
  run_cmd->add_option("--config", config_path, "JSON config file")->required();
  run_cmd->add_option("--out", out_override, "output directory (overrides config)");
  run_cmd->add_option("--seeds", seeds_override, "comma-separated seed list (overrides config)");
  run_cmd->add_option("--variant", variant_override, "solver variant (overrides config)");

  // prescribe
  auto* pre_cmd = app.add_subcommand("prescribe", "print step-size/penalty/batch prescriptions");
  long pre_n = 0, pre_d = 0;
  double pre_L = 1.0, pre_alpha = 1.0, pre_l = 0.0, pre_kappa = 1.0, pre_samin = 1.0, pre_samax = 0.0;
  std::string pre_variant = "zo-svrg-admm";
  pre_cmd->add_option("--n", pre_n, "number of components")->required();
  pre_cmd->add_option("--d", pre_d, "dimension")->required();
  pre_cmd->add_option("--L", pre_L, "gradient Lipschitz constant")->required();
  pre_cmd->add_option("--alpha", pre_alpha, "step scale in (0, 1]");
  pre_cmd->add_option("--l", pre_l, "dimension regime: 0, 0.5 or 1");
  pre_cmd->add_option("--variant", pre_variant, "zo-svrg-admm or zo-saga-admm");
  pre_cmd->add_option("--kappa-g", pre_kappa, "condition number of G (default 1)");
  pre_cmd->add_option("--sigma-a-min", pre_samin, "smallest eigenvalue of A^T A");
  pre_cmd->add_option("--sigma-a-max", pre_samax, "largest eigenvalue of A^T A (default: sigma-a-min)");

  // check-gradient
  auto* check_cmd = app.add_subcommand("check-gradient", "verify the estimator bound on a builder problem");
  zoadmm::ProblemSpec check_spec;
  double check_mu = 1e-3;
  int check_trials = 100;
  check_cmd->add_option("--builder", check_spec.builder, "problem builder");
  check_cmd->add_option("--loss", check_spec.loss, "correntropy | least_squares | logistic");
  check_cmd->add_option("--n", check_spec.n, "synthetic sample count");
  check_cmd->add_option("--d", check_spec.d, "synthetic dimension");
  check_cmd->add_option("--sigma", check_spec.sigma, "correntropy width");
  check_cmd->add_option("--data-seed", check_spec.data_seed, "synthetic data seed");
  check_cmd->add_option("--path", check_spec.path, "libsvm file for the libsvm builder");
  check_cmd->add_option("--L", check_spec.lipschitz_override, "override the certified Lipschitz constant");
  check_cmd->add_option("--mu", check_mu, "smoothing parameter");
  check_cmd->add_option("--trials", check_trials, "number of random probes");

  // bench
  auto* bench_cmd = app.add_subcommand("bench", "equal-budget comparison of the stochastic variants");
  zoadmm::BenchOptions bench_opts;
  std::string bench_seeds;
  bench_cmd->add_option("--n", bench_opts.n, "sample count");
  bench_cmd->add_option("--d", bench_opts.d, "dimension");
  bench_cmd->add_option("--budget", bench_opts.budget, "optimization evaluations per run");
  bench_cmd->add_option("--b", bench_opts.batch_size, "mini-batch size");
  bench_cmd->add_option("--eta", bench_opts.eta, "step size (0 = default)");
  bench_cmd->add_option("--rho", bench_opts.rho, "penalty parameter (0 = default)");
  bench_cmd->add_option("--m", bench_opts.epoch_length, "epoch length (0 = n/b)");
  bench_cmd->add_option("--tau", bench_opts.tau, "l1 penalty weight");
  bench_cmd->add_option("--seeds", bench_seeds, "comma-separated seed list");
  bench_cmd->add_option("--out", bench_opts.out_dir, "directory for per-run trace CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run_cmd) return cmd_run(config_path, out_override, seeds_override, variant_override);
    if (*pre_cmd) {
      return cmd_prescribe(pre_n, pre_d, pre_L, pre_alpha, pre_l, pre_variant, pre_kappa, pre_samin, pre_samax);
    }
    if (*check_cmd) return cmd_check_gradient(check_spec, check_mu, check_trials);
    if (*bench_cmd) {
      if (!bench_seeds.empty()) bench_opts.seeds = parse_seed_list(bench_seeds);
      return cmd_bench(bench_opts);
    }
  } catch (const zoadmm::DivergedError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const zoadmm::NonFiniteValueError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const zoadmm::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const zoadmm::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const zoadmm::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return kExitConfig;
}
