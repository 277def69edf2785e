#include "iuq/iuq.h"

#include <cstring>
#include <sstream>
#include <string>

#include "allocation.hpp"
#include "ci.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "experiment.hpp"
#include "model.hpp"

struct iuq_data {
  iuq::InputCollection collection;
};

struct iuq_model {
  std::unique_ptr<iuq::SimulationModel> model;
};

namespace {

thread_local std::string t_last_error;

iuq_status map_code(iuq::ErrorCode code) {
  switch (code) {
    case iuq::ErrorCode::invalid_parameter:
      return IUQ_ERROR_INVALID_PARAMETER;
    case iuq::ErrorCode::invalid_input:
      return IUQ_ERROR_INVALID_INPUT;
    case iuq::ErrorCode::subsample_too_small:
      return IUQ_ERROR_SUBSAMPLE_TOO_SMALL;
    case iuq::ErrorCode::budget_too_small:
      return IUQ_ERROR_BUDGET_TOO_SMALL;
    case iuq::ErrorCode::io_error:
      return IUQ_ERROR_IO;
    case iuq::ErrorCode::unknown_model:
      return IUQ_ERROR_UNKNOWN_MODEL;
  }
  return IUQ_ERROR_INTERNAL;
}

template <typename Fn>
iuq_status wrap(Fn&& fn) noexcept {
  try {
    fn();
    t_last_error.clear();
    return IUQ_OK;
  } catch (const iuq::Error& e) {
    t_last_error = e.what();
    return map_code(e.code());
  } catch (const std::exception& e) {
    t_last_error = e.what();
    return IUQ_ERROR_INTERNAL;
  } catch (...) {
    t_last_error = "unknown error";
    return IUQ_ERROR_INTERNAL;
  }
}

iuq_status fail_param(const char* message) noexcept {
  t_last_error = message;
  return IUQ_ERROR_INVALID_PARAMETER;
}

void copy_string(char* dst, size_t dst_size, const std::string& src) {
  if (dst_size == 0) return;
  size_t n = std::min(dst_size - 1, src.size());
  std::memcpy(dst, src.data(), n);
  dst[n] = '\0';
}

iuq::ModelParams parse_params(const char* params) {
  iuq::ModelParams out;
  if (params == nullptr) return out;
  std::string text(params);
  for (char& c : text) {
    if (c == ',') c = ' ';
  }
  std::istringstream is(text);
  std::string item;
  while (is >> item) {
    auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == item.size()) {
      throw iuq::Error::invalid_parameter("model parameter must be key=value, got '" + item + "'");
    }
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

iuq::EstimatorConfig make_config(int outer_b, int inner_r, double theta, int target_model) {
  iuq::EstimatorConfig cfg;
  cfg.outer_b = outer_b;
  cfg.inner_r = inner_r;
  cfg.theta = theta;
  if (target_model != 0) cfg.target_model = target_model;
  return cfg;
}

iuq::CoverageReport to_core(const iuq_coverage_report& r) {
  iuq::CoverageReport core;
  core.coverage = r.coverage;
  core.mean_length = r.mean_length;
  core.std_length = r.std_length;
  core.sigma_ratio = r.sigma_ratio;
  core.bias = r.bias;
  core.truth = r.truth;
  core.truth_se = r.truth_se;
  core.theta = r.theta;
  core.neg_var_count = r.neg_var_count;
  core.trials = r.trials;
  core.point_reps = r.point_reps;
  core.outer_b = r.outer_b;
  core.inner_r = r.inner_r;
  core.mode = r.mode;
  core.config_echo = r.config;
  return core;
}

void from_core(const iuq::CoverageReport& core, iuq_coverage_report* out) {
  out->coverage = core.coverage;
  out->mean_length = core.mean_length;
  out->std_length = core.std_length;
  out->sigma_ratio = core.sigma_ratio;
  out->bias = core.bias;
  out->truth = core.truth;
  out->truth_se = core.truth_se;
  out->theta = core.theta;
  out->neg_var_count = core.neg_var_count;
  out->trials = core.trials;
  out->point_reps = core.point_reps;
  out->outer_b = core.outer_b;
  out->inner_r = core.inner_r;
  copy_string(out->mode, sizeof(out->mode), core.mode);
  copy_string(out->config, sizeof(out->config), core.config_echo);
}

}  // namespace

extern "C" {

const char* iuq_version(void) {
  return "0.1.0";
}

const char* iuq_last_error(void) {
  return t_last_error.c_str();
}

iuq_status iuq_data_create(iuq_data** out) {
  if (out == nullptr) return fail_param("output pointer is null");
  return wrap([&] { *out = new iuq_data(); });
}

void iuq_data_free(iuq_data* data) {
  delete data;
}

iuq_status iuq_data_add_file(iuq_data* data, const char* path) {
  if (data == nullptr || path == nullptr) return fail_param("null argument");
  return wrap([&] { data->collection.add(iuq::Dataset::load_file(path)); });
}

iuq_status iuq_data_add_values(iuq_data* data, const double* values, size_t count) {
  if (data == nullptr || values == nullptr) return fail_param("null argument");
  return wrap([&] {
    data->collection.add(iuq::Dataset::from_values(std::vector<double>(values, values + count)));
  });
}

size_t iuq_data_model_count(const iuq_data* data) {
  return data == nullptr ? 0 : data->collection.model_count();
}

iuq_status iuq_data_size(const iuq_data* data, size_t model_index, size_t* out) {
  if (data == nullptr || out == nullptr) return fail_param("null argument");
  return wrap([&] { *out = data->collection.dataset(model_index).size(); });
}

iuq_status iuq_model_create(const char* name, const char* params, iuq_model** out) {
  if (name == nullptr || out == nullptr) return fail_param("null argument");
  return wrap([&] {
    auto model = iuq::create_model(name, parse_params(params));
    *out = new iuq_model{std::move(model)};
  });
}

iuq_status iuq_model_create_mm1(int num_customers, double threshold, iuq_model** out) {
  if (out == nullptr) return fail_param("null argument");
  return wrap([&] {
    *out = new iuq_model{std::make_unique<iuq::Mm1WaitModel>(num_customers, threshold)};
  });
}

iuq_status iuq_model_create_mean(int exact, iuq_model** out) {
  if (out == nullptr) return fail_param("null argument");
  return wrap([&] { *out = new iuq_model{std::make_unique<iuq::MeanFunctional>(exact != 0)}; });
}

void iuq_model_free(iuq_model* model) {
  delete model;
}

iuq_status iuq_estimate(const iuq_data* data, const iuq_model* model, int outer_b, int inner_r,
                        double theta, int target_model, uint64_t seed,
                        iuq_variance_estimate* out) {
  if (data == nullptr || model == nullptr || out == nullptr) return fail_param("null argument");
  return wrap([&] {
    auto cfg = make_config(outer_b, inner_r, theta, target_model);
    iuq::VarianceEstimate est;
    if (target_model != 0) {
      est = iuq::subsampled_variance_single(data->collection, *model->model, target_model, cfg,
                                            iuq::MasterSeed{seed});
    } else {
      est = iuq::subsampled_variance_bootstrap(data->collection, *model->model, cfg,
                                               iuq::MasterSeed{seed});
    }
    out->sigma2 = est.sigma2;
    out->within_group_v = est.within_group_v;
    out->grand_mean = est.grand_mean;
    out->theta = est.theta;
    out->budget_used = est.budget_used;
    out->outer_b = outer_b;
    out->inner_r = inner_r;
    out->target_model = target_model;
    out->negative = est.negative() ? 1 : 0;
  });
}

iuq_status iuq_practical_ratio(const int64_t* sizes, size_t count, int64_t target_subsample,
                               double* out_theta) {
  if (sizes == nullptr || out_theta == nullptr) return fail_param("null argument");
  return wrap([&] {
    std::vector<long long> s(sizes, sizes + count);
    *out_theta = iuq::practical_ratio(s, target_subsample);
  });
}

iuq_status iuq_theoretical_ratio(int64_t total_budget, double n_bar, double* out_theta) {
  if (out_theta == nullptr) return fail_param("null argument");
  return wrap([&] { *out_theta = iuq::theoretical_ratio(total_budget, n_bar); });
}

iuq_status iuq_allocate(int64_t total_budget, double theta, double n_bar, double inner_multiplier,
                        const char* rule, iuq_allocation* out) {
  if (out == nullptr) return fail_param("null argument");
  return wrap([&] {
    auto plan = iuq::allocate(total_budget, theta, n_bar, inner_multiplier,
                              rule == nullptr ? "fixed" : rule);
    out->outer_b = plan.outer_b;
    out->inner_r = plan.inner_r;
    out->theta = plan.theta;
    out->n_target = plan.n_target;
    out->n_bar = plan.n_bar;
    out->leftover = plan.leftover();
    copy_string(out->rule, sizeof(out->rule), plan.rule_used);
  });
}

iuq_status iuq_theoretical_inner_size(double theta, double tau2_pilot, double input_var_pilot,
                                      double* out) {
  if (out == nullptr) return fail_param("null argument");
  return wrap([&] { *out = iuq::theoretical_inner_size(theta, tau2_pilot, input_var_pilot); });
}

int iuq_validate_regime(int outer_b, int inner_r, double theta, double n_bar, char* buffer,
                        size_t buffer_size) {
  std::vector<std::string> warnings;
  try {
    warnings = iuq::validate_consistency_regime(outer_b, inner_r, theta, n_bar);
  } catch (...) {
    return 0;
  }
  std::string joined;
  for (const auto& w : warnings) {
    if (!joined.empty()) joined += '\n';
    joined += w;
  }
  if (buffer != nullptr && buffer_size > 0) copy_string(buffer, buffer_size, joined);
  return static_cast<int>(warnings.size());
}

iuq_status iuq_normal_quantile(double p, double* out) {
  if (out == nullptr) return fail_param("null argument");
  return wrap([&] { *out = iuq::normal_quantile(p); });
}

namespace {

void fill_interval(const iuq::CiResult& result, iuq_interval* out) {
  out->center = result.interval.center;
  out->halfwidth = result.interval.halfwidth;
  out->level = result.interval.level;
  out->sigma_i2_used = result.interval.sigma_i2_used;
  out->sigma_s2_used = result.interval.sigma_s2_used;
  out->sigma2_signed = result.variance.sigma2;
  out->within_group_v = result.variance.within_group_v;
  out->was_truncated = result.interval.was_truncated ? 1 : 0;
}

}  // namespace

iuq_status iuq_ci_splitting(const iuq_data* data, const iuq_model* model, int outer_b, int inner_r,
                            double theta, int64_t point_reps, double alpha, uint64_t seed,
                            iuq_interval* out) {
  if (data == nullptr || model == nullptr || out == nullptr) return fail_param("null argument");
  return wrap([&] {
    auto cfg = make_config(outer_b, inner_r, theta, 0);
    auto result = iuq::ci_splitting(data->collection, *model->model, cfg, point_reps, alpha,
                                    iuq::MasterSeed{seed});
    fill_interval(result, out);
  });
}

iuq_status iuq_ci_nonsplitting(const iuq_data* data, const iuq_model* model, int outer_b,
                               int inner_r, double theta, double alpha, uint64_t seed,
                               iuq_interval* out) {
  if (data == nullptr || model == nullptr || out == nullptr) return fail_param("null argument");
  return wrap([&] {
    auto cfg = make_config(outer_b, inner_r, theta, 0);
    auto result =
        iuq::ci_nonsplitting(data->collection, *model->model, cfg, alpha, iuq::MasterSeed{seed});
    fill_interval(result, out);
  });
}

iuq_status iuq_experiment_run(const char* config_path, const iuq_experiment_options* options,
                              iuq_coverage_report* out) {
  if (config_path == nullptr || out == nullptr) return fail_param("null argument");
  return wrap([&] {
    auto cfg = iuq::ExperimentConfig::parse_file(config_path);
    if (options != nullptr) {
      if (options->has_seed) cfg.seed = iuq::MasterSeed{options->seed};
      if (options->workers > 0) cfg.workers = options->workers;
    }
    auto report = iuq::run_coverage_experiment(cfg);
    if (options != nullptr && options->trace_csv != nullptr) {
      iuq::write_trace_csv(report, options->trace_csv);
    }
    from_core(report, out);
  });
}

iuq_status iuq_report_write_csv(const iuq_coverage_report* report, const char* path) {
  if (report == nullptr || path == nullptr) return fail_param("null argument");
  return wrap([&] { iuq::write_report_csv(to_core(*report), path); });
}

iuq_status iuq_report_format_table(const iuq_coverage_report* report, char* buffer,
                                   size_t buffer_size) {
  if (report == nullptr || buffer == nullptr) return fail_param("null argument");
  return wrap([&] { copy_string(buffer, buffer_size, iuq::format_report_table(to_core(*report))); });
}

}  // extern "C"
