// iuq command line: variance estimation, budget allocation, confidence
// intervals and coverage experiments, all through the C API of libiuq.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "iuq/iuq.h"

namespace {

[[noreturn]] void die(const char* what, iuq_status status) {
  std::fprintf(stderr, "error: %s: %s (status %d)\n", what, iuq_last_error(), status);
  std::exit(1);
}

void check(iuq_status status, const char* what) {
  if (status != IUQ_OK) die(what, status);
}

struct DataArgs {
  std::vector<std::string> files;
};

struct ModelArgs {
  std::string name = "mm1";
  int customers = 20;
  double threshold = 2.0;
  bool exact = false;
};

void add_data_options(CLI::App* cmd, DataArgs& args) {
  cmd->add_option("--data", args.files, "dataset file, one per input model (order = model index)")
      ->required()
      ->check(CLI::ExistingFile);
}

void add_model_options(CLI::App* cmd, ModelArgs& args) {
  cmd->add_option("--model", args.name, "simulation model name (mm1, mean, ...)");
  cmd->add_option("--customers", args.customers, "mm1: customer whose waiting time is observed");
  cmd->add_option("--threshold", args.threshold, "mm1: waiting-time threshold");
  cmd->add_flag("--exact", args.exact, "mean: return the exact distribution mean");
}

iuq_data* load_data(const DataArgs& args) {
  iuq_data* data = nullptr;
  check(iuq_data_create(&data), "creating data collection");
  for (const auto& file : args.files) {
    check(iuq_data_add_file(data, file.c_str()), file.c_str());
  }
  return data;
}

iuq_model* make_model(const ModelArgs& args) {
  iuq_model* model = nullptr;
  std::ostringstream params;
  if (args.name == "mm1") {
    params << "customers=" << args.customers << " threshold=" << args.threshold;
  } else if (args.name == "mean" && args.exact) {
    params << "exact=1";
  }
  check(iuq_model_create(args.name.c_str(), params.str().c_str(), &model), "creating model");
  return model;
}

std::vector<int64_t> data_sizes(const iuq_data* data) {
  std::vector<int64_t> sizes;
  for (size_t i = 1; i <= iuq_data_model_count(data); ++i) {
    size_t n = 0;
    check(iuq_data_size(data, i, &n), "reading dataset size");
    sizes.push_back(static_cast<int64_t>(n));
  }
  return sizes;
}

double mean_size(const std::vector<int64_t>& sizes) {
  return static_cast<double>(std::accumulate(sizes.begin(), sizes.end(), int64_t{0})) /
         static_cast<double>(sizes.size());
}

void print_warnings(int outer_b, int inner_r, double theta, double n_bar) {
  char buf[1024];
  int count = iuq_validate_regime(outer_b, inner_r, theta, n_bar, buf, sizeof(buf));
  if (count > 0) std::fprintf(stderr, "warning:\n%s\n", buf);
}

int cmd_estimate(const DataArgs& data_args, const ModelArgs& model_args, int B, int R,
                 double theta, int target_model, uint64_t seed, const std::string& out_path) {
  iuq_data* data = load_data(data_args);
  iuq_model* model = make_model(model_args);

  iuq_variance_estimate est{};
  check(iuq_estimate(data, model, B, R, theta, target_model, seed, &est), "estimate");

  std::printf("sigma2       = %.10g\n", est.sigma2);
  std::printf("within_v     = %.10g\n", est.within_group_v);
  std::printf("grand_mean   = %.10g\n", est.grand_mean);
  std::printf("negative     = %s\n", est.negative ? "yes" : "no");
  std::printf("B=%d R=%d theta=%.10g budget=%" PRId64 "\n", est.outer_b, est.inner_r, est.theta,
              est.budget_used);
  if (target_model != 0) std::printf("target_model = %d\n", est.target_model);

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) die("opening --out file", IUQ_ERROR_IO);
    out << "sigma2,v,B,R,theta,budget_used\n";
    char row[256];
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%d,%d,%.17g,%" PRId64 "\n", est.sigma2,
                  est.within_group_v, est.outer_b, est.inner_r, est.theta, est.budget_used);
    out << row;
  }

  iuq_model_free(model);
  iuq_data_free(data);
  return 0;
}

int cmd_allocate(int64_t N, const std::vector<int64_t>& sizes, const std::string& rule,
                 int64_t target_subsample, double inner_multiplier) {
  double theta = 0.0;
  if (rule == "practical") {
    check(iuq_practical_ratio(sizes.data(), sizes.size(), target_subsample, &theta),
          "practical ratio");
  } else if (rule == "theoretical") {
    check(iuq_theoretical_ratio(N, mean_size(sizes), &theta), "theoretical ratio");
  } else {
    std::fprintf(stderr, "error: --rule must be practical or theoretical\n");
    return 1;
  }

  iuq_allocation plan{};
  check(iuq_allocate(N, theta, mean_size(sizes), inner_multiplier, rule.c_str(), &plan), "allocate");

  std::printf("rule     = %s\n", plan.rule);
  std::printf("theta    = %.10g\n", plan.theta);
  std::printf("B        = %d\n", plan.outer_b);
  std::printf("R        = %d\n", plan.inner_r);
  std::printf("budget   = %" PRId64 " (leftover %" PRId64 ")\n", plan.n_target, plan.leftover);
  print_warnings(plan.outer_b, plan.inner_r, plan.theta, plan.n_bar);
  return 0;
}

int cmd_ci(const DataArgs& data_args, const ModelArgs& model_args, const std::string& mode,
           int64_t N, double alpha, const std::string& theta_rule, double theta_fixed,
           int64_t target_subsample, int B, int R, double split_fraction, double inner_multiplier,
           uint64_t seed) {
  iuq_data* data = load_data(data_args);
  iuq_model* model = make_model(model_args);
  auto sizes = data_sizes(data);
  double n_bar = mean_size(sizes);

  double theta = theta_fixed;
  if (theta <= 0.0) {
    if (theta_rule == "practical") {
      check(iuq_practical_ratio(sizes.data(), sizes.size(), target_subsample, &theta),
            "practical ratio");
    } else if (theta_rule == "theoretical") {
      check(iuq_theoretical_ratio(N, n_bar, &theta), "theoretical ratio");
    } else {
      std::fprintf(stderr, "error: --theta-rule must be practical or theoretical\n");
      return 1;
    }
  }

  const bool split = mode == "split";
  int64_t point_reps = 0;
  if (B <= 0 || R <= 0) {
    int64_t var_budget =
        split ? static_cast<int64_t>(static_cast<double>(N) * split_fraction) : N;
    iuq_allocation plan{};
    const char* rule_label = theta_fixed > 0.0 ? "fixed" : theta_rule.c_str();
    check(iuq_allocate(var_budget, theta, n_bar, inner_multiplier, rule_label, &plan),
          "allocate");
    B = plan.outer_b;
    R = plan.inner_r;
    point_reps = split ? N - var_budget : 0;
  } else {
    point_reps = split ? N - static_cast<int64_t>(B) * R : 0;
  }

  iuq_interval ci{};
  if (split) {
    check(iuq_ci_splitting(data, model, B, R, theta, point_reps, alpha, seed, &ci), "ci split");
  } else {
    check(iuq_ci_nonsplitting(data, model, B, R, theta, alpha, seed, &ci), "ci nosplit");
  }

  std::printf("center     = %.10g\n", ci.center);
  std::printf("halfwidth  = %.10g\n", ci.halfwidth);
  std::printf("interval   = [%.10g, %.10g]\n", ci.center - ci.halfwidth,
              ci.center + ci.halfwidth);
  std::printf("sigma_I^2  = %.10g%s\n", ci.sigma_i2_used,
              ci.was_truncated ? " (negative estimate truncated to 0)" : "");
  std::printf("sigma_S^2  = %.10g\n", ci.sigma_s2_used);
  std::printf("level=%.4g B=%d R=%d theta=%.10g point_reps=%" PRId64 "\n", ci.level, B, R, theta,
              point_reps);
  print_warnings(B, R, theta, n_bar);

  iuq_model_free(model);
  iuq_data_free(data);
  return 0;
}

int cmd_experiment(const std::string& config, const std::string& out_csv,
                   const std::string& trace_csv, bool has_seed, uint64_t seed, int workers) {
  iuq_experiment_options options{};
  options.trace_csv = trace_csv.empty() ? nullptr : trace_csv.c_str();
  options.has_seed = has_seed ? 1 : 0;
  options.seed = seed;
  options.workers = workers;

  iuq_coverage_report report{};
  check(iuq_experiment_run(config.c_str(), &options, &report), "experiment");

  char table[1024];
  check(iuq_report_format_table(&report, table, sizeof(table)), "format table");
  std::fputs(table, stdout);
  std::printf("truth=%.6g (se %.2g)  trials=%" PRId64 "\n", report.truth, report.truth_se,
              report.trials);

  if (!out_csv.empty()) {
    check(iuq_report_write_csv(&report, out_csv.c_str()), "writing report CSV");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"input uncertainty quantification for stochastic simulation"};
  app.require_subcommand(1);

  // estimate
  DataArgs est_data;
  ModelArgs est_model;
  int est_B = 50, est_R = 20, est_target = 0;
  double est_theta = 1.0;
  uint64_t est_seed = 12345;
  std::string est_out;
  auto* estimate = app.add_subcommand("estimate", "run the subsampled variance bootstrap");
  add_data_options(estimate, est_data);
  add_model_options(estimate, est_model);
  estimate->add_option("--B", est_B, "outer resamples")->required();
  estimate->add_option("--R", est_R, "inner replications")->required();
  estimate->add_option("--theta", est_theta, "subsample ratio in (0,1]")->required();
  estimate->add_option("--target-model", est_target, "estimate one model's contribution (1-based)");
  estimate->add_option("--seed", est_seed, "master seed");
  estimate->add_option("--out", est_out, "write the estimate as CSV");

  // allocate
  int64_t alloc_N = 1500;
  std::vector<int64_t> alloc_sizes;
  std::string alloc_rule = "practical";
  int64_t alloc_target = 30;
  double alloc_mult = 1.0;
  auto* allocate = app.add_subcommand("allocate", "turn a budget into (B, R, theta)");
  allocate->add_option("--N", alloc_N, "total simulation budget")->required();
  allocate->add_option("--sizes", alloc_sizes, "dataset sizes, e.g. --sizes 4000,2000")
      ->required()
      ->delimiter(',');
  allocate->add_option("--rule", alloc_rule, "practical | theoretical");
  allocate->add_option("--target-subsample", alloc_target, "practical rule target (default 30)");
  allocate->add_option("--inner-multiplier", alloc_mult, "constant in R = round(c*theta*n)");

  // ci
  DataArgs ci_data;
  ModelArgs ci_model;
  std::string ci_mode = "split", ci_rule = "practical";
  int64_t ci_N = 1500, ci_target = 30;
  double ci_alpha = 0.05, ci_theta = 0.0, ci_frac = 2.0 / 3.0, ci_mult = 1.0;
  int ci_B = 0, ci_R = 0;
  uint64_t ci_seed = 12345;
  auto* ci = app.add_subcommand("ci", "confidence interval for the performance measure");
  add_data_options(ci, ci_data);
  add_model_options(ci, ci_model);
  ci->add_option("--mode", ci_mode, "split | nosplit");
  ci->add_option("--N", ci_N, "total simulation budget");
  ci->add_option("--alpha", ci_alpha, "1 - confidence level");
  ci->add_option("--theta-rule", ci_rule, "practical | theoretical");
  ci->add_option("--theta", ci_theta, "fixed subsample ratio (overrides --theta-rule)");
  ci->add_option("--target-subsample", ci_target, "practical rule target");
  ci->add_option("--B", ci_B, "outer resamples (with --R, overrides allocation)");
  ci->add_option("--R", ci_R, "inner replications");
  ci->add_option("--split-fraction", ci_frac, "share of N spent on variance estimation");
  ci->add_option("--inner-multiplier", ci_mult, "constant in R = round(c*theta*n)");
  ci->add_option("--seed", ci_seed, "master seed");

  // experiment
  std::string exp_config, exp_out, exp_trace;
  uint64_t exp_seed = 0;
  int exp_workers = 0;
  auto* experiment = app.add_subcommand("experiment", "coverage experiment from a config file");
  experiment->add_option("--config", exp_config, "key=value config file")
      ->required()
      ->check(CLI::ExistingFile);
  experiment->add_option("--out", exp_out, "append a CSV row to this file");
  experiment->add_option("--trace", exp_trace, "write per-trial records to this file");
  auto* seed_opt = experiment->add_option("--seed", exp_seed, "master seed (overrides config)");
  experiment->add_option("--workers", exp_workers, "worker threads (overrides config)");

  CLI11_PARSE(app, argc, argv);

  if (estimate->parsed()) {
    return cmd_estimate(est_data, est_model, est_B, est_R, est_theta, est_target, est_seed,
                        est_out);
  }
  if (allocate->parsed()) {
    return cmd_allocate(alloc_N, alloc_sizes, alloc_rule, alloc_target, alloc_mult);
  }
  if (ci->parsed()) {
    return cmd_ci(ci_data, ci_model, ci_mode, ci_N, ci_alpha, ci_rule, ci_theta, ci_target, ci_B,
                  ci_R, ci_frac, ci_mult, ci_seed);
  }
  if (experiment->parsed()) {
    return cmd_experiment(exp_config, exp_out, exp_trace, seed_opt->count() > 0, exp_seed,
                          exp_workers);
  }
  return 0;
}
