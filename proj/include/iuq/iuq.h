/*
 * iuq -- input uncertainty quantification for stochastic simulation.
 *
 * C interface to the shared library. All functions return iuq_status; on
 * failure iuq_last_error() describes what went wrong (thread-local). Opaque
 * handles are created and destroyed by the matching create/free pair and are
 * not thread-safe for concurrent mutation; read-only use from several threads
 * is fine.
 *
 * Input model indices are 1-based throughout; 0 means "all models" where a
 * target parameter accepts it.
 */
#ifndef IUQ_H
#define IUQ_H

#include <stddef.h>
#include <stdint.h>

#if defined(__GNUC__)
#define IUQ_API __attribute__((visibility("default")))
#else
#define IUQ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum iuq_status {
  IUQ_OK = 0,
  IUQ_ERROR_INVALID_PARAMETER = 1,
  IUQ_ERROR_INVALID_INPUT = 2,
  IUQ_ERROR_SUBSAMPLE_TOO_SMALL = 3,
  IUQ_ERROR_BUDGET_TOO_SMALL = 4,
  IUQ_ERROR_IO = 5,
  IUQ_ERROR_UNKNOWN_MODEL = 6,
  IUQ_ERROR_INTERNAL = 7
} iuq_status;

IUQ_API const char* iuq_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
IUQ_API const char* iuq_last_error(void);

/* ---- input data ------------------------------------------------------- */

typedef struct iuq_data iuq_data;

IUQ_API iuq_status iuq_data_create(iuq_data** out);
IUQ_API void iuq_data_free(iuq_data* data);

/* Appends one input model from a text file (one real per line, blank lines
 * ignored). The order of add calls defines the model index. */
IUQ_API iuq_status iuq_data_add_file(iuq_data* data, const char* path);
IUQ_API iuq_status iuq_data_add_values(iuq_data* data, const double* values, size_t count);

IUQ_API size_t iuq_data_model_count(const iuq_data* data);
IUQ_API iuq_status iuq_data_size(const iuq_data* data, size_t model_index, size_t* out);

/* ---- simulation models ------------------------------------------------ */

typedef struct iuq_model iuq_model;

/* Creates a registered model by name. params is a whitespace- or
 * comma-separated key=value list, e.g. "customers=20 threshold=2.0";
 * NULL or "" means defaults. Builtins: mm1, mean, summeans, constant. */
IUQ_API iuq_status iuq_model_create(const char* name, const char* params, iuq_model** out);
IUQ_API iuq_status iuq_model_create_mm1(int num_customers, double threshold, iuq_model** out);
IUQ_API iuq_status iuq_model_create_mean(int exact, iuq_model** out);
IUQ_API void iuq_model_free(iuq_model* model);

/* ---- variance estimation ---------------------------------------------- */

typedef struct iuq_variance_estimate {
  double sigma2;         /* signed input-variance estimate */
  double within_group_v; /* pooled within-group variance V */
  double grand_mean;
  double theta;
  int64_t budget_used; /* exactly B*R */
  int32_t outer_b;
  int32_t inner_r;
  int32_t target_model; /* 0 = all models */
  int32_t negative;     /* 1 when sigma2 < 0 */
} iuq_variance_estimate;

/* Subsampled variance bootstrap (theta = 1 reproduces the full-size variance
 * bootstrap bit for bit). target_model = 0 resamples every dataset;
 * target_model = i resamples only dataset i. */
IUQ_API iuq_status iuq_estimate(const iuq_data* data, const iuq_model* model, int outer_b,
                                int inner_r, double theta, int target_model, uint64_t seed,
                                iuq_variance_estimate* out);

/* ---- budget allocation ------------------------------------------------ */

typedef struct iuq_allocation {
  int32_t outer_b;
  int32_t inner_r;
  double theta;
  int64_t n_target;
  double n_bar;
  int64_t leftover; /* budget discarded by the B*R grid */
  char rule[24];
} iuq_allocation;

IUQ_API iuq_status iuq_practical_ratio(const int64_t* sizes, size_t count,
                                       int64_t target_subsample, double* out_theta);
IUQ_API iuq_status iuq_theoretical_ratio(int64_t total_budget, double n_bar, double* out_theta);

/* rule is a label recorded in the plan ("practical", "theoretical", ...);
 * NULL means "fixed". */
IUQ_API iuq_status iuq_allocate(int64_t total_budget, double theta, double n_bar,
                                double inner_multiplier, const char* rule, iuq_allocation* out);
IUQ_API iuq_status iuq_theoretical_inner_size(double theta, double tau2_pilot,
                                              double input_var_pilot, double* out);

/* Writes newline-separated warnings into buffer (always NUL-terminated when
 * buffer_size > 0) and returns the warning count; never fails. */
IUQ_API int iuq_validate_regime(int outer_b, int inner_r, double theta, double n_bar,
                                char* buffer, size_t buffer_size);

/* ---- confidence intervals --------------------------------------------- */

IUQ_API iuq_status iuq_normal_quantile(double p, double* out);

typedef struct iuq_interval {
  double center;
  double halfwidth;
  double level; /* 1 - alpha */
  double sigma_i2_used;
  double sigma_s2_used;
  double sigma2_signed;
  double within_group_v;
  int32_t was_truncated;
} iuq_interval;

IUQ_API iuq_status iuq_ci_splitting(const iuq_data* data, const iuq_model* model, int outer_b,
                                    int inner_r, double theta, int64_t point_reps, double alpha,
                                    uint64_t seed, iuq_interval* out);
IUQ_API iuq_status iuq_ci_nonsplitting(const iuq_data* data, const iuq_model* model, int outer_b,
                                       int inner_r, double theta, double alpha, uint64_t seed,
                                       iuq_interval* out);

/* ---- coverage experiments --------------------------------------------- */

typedef struct iuq_coverage_report {
  double coverage;
  double mean_length;
  double std_length;
  double sigma_ratio;
  double bias;
  double truth;
  double truth_se;
  double theta;
  int64_t neg_var_count;
  int64_t trials;
  int64_t point_reps;
  int32_t outer_b;
  int32_t inner_r;
  char mode[16];
  char config[512];
} iuq_coverage_report;

typedef struct iuq_experiment_options {
  const char* trace_csv; /* optional per-trial dump, NULL to skip */
  uint64_t seed;         /* used when has_seed != 0, else the config's seed */
  int32_t has_seed;
  int32_t workers; /* 0 = use the config's worker count */
} iuq_experiment_options;

/* Runs the coverage experiment described by a key=value config file.
 * options may be NULL. */
IUQ_API iuq_status iuq_experiment_run(const char* config_path,
                                      const iuq_experiment_options* options,
                                      iuq_coverage_report* out);

/* Appends one CSV row (header first when the file is new or empty). */
IUQ_API iuq_status iuq_report_write_csv(const iuq_coverage_report* report, const char* path);

/* Human-readable table; truncates to buffer_size - 1 characters. */
IUQ_API iuq_status iuq_report_format_table(const iuq_coverage_report* report, char* buffer,
                                           size_t buffer_size);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* IUQ_H */
