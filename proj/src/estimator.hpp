#pragma once

#include <optional>
#include <span>
#include <vector>

#include "dataset.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace iuq {

struct EstimatorConfig {
  int outer_b = 0;     // bootstrap resamples, >= 2
  int inner_r = 0;     // replications per resample, >= 2
  double theta = 1.0;  // subsample ratio in (0, 1]
  // 1-based input model whose variance contribution is estimated; resamples
  // only that dataset and keeps the others fixed at full size. Empty means
  // all models are resampled (proportionate subsampling).
  std::optional<int> target_model;
};

// Output of the two-layer resampling loop. sigma2 may be negative because of
// the bias correction; it is preserved here and only truncated at CI time.
struct VarianceEstimate {
  double sigma2 = 0.0;
  double within_group_v = 0.0;        // pooled within-group variance V
  std::vector<double> group_means;    // per-resample replication means
  double grand_mean = 0.0;
  long long budget_used = 0;          // exactly B*R
  double theta = 1.0;
  std::optional<int> target_model;

  bool negative() const { return sigma2 < 0.0; }
};

// Between-group variance of the group means minus the within-group bias
// correction v/r. May be negative.
double between_minus_within(std::span<const double> group_means, double v, int r);

// Pooled within-group sample variance, sum_b sum_r (y_br - mean_b)^2 / (B(R-1)).
double within_group_variance(std::span<const std::vector<double>> groups);

// Full-size variance bootstrap; requires cfg.theta == 1. Identical code path
// to the subsampled estimator, so the theta=1 equivalence holds bit-for-bit.
VarianceEstimate variance_bootstrap(const InputCollection& data, const SimulationModel& model,
                                    const EstimatorConfig& cfg, MasterSeed seed);
VarianceEstimate variance_bootstrap(const InputCollection& data, const SimulationModel& model,
                                    const EstimatorConfig& cfg, RngStream base);

// Proportionate subsampled variance bootstrap: resamples every dataset at
// size floor(theta*n_i), then rescales the between-minus-within quantity by
// theta to estimate the input variance at the full data size.
VarianceEstimate subsampled_variance_bootstrap(const InputCollection& data,
                                               const SimulationModel& model,
                                               const EstimatorConfig& cfg, MasterSeed seed);
VarianceEstimate subsampled_variance_bootstrap(const InputCollection& data,
                                               const SimulationModel& model,
                                               const EstimatorConfig& cfg, RngStream base);

// Variance contribution of input model i alone: only dataset i is resampled,
// all other models run on their full empirical distributions.
VarianceEstimate subsampled_variance_single(const InputCollection& data,
                                            const SimulationModel& model, int model_index,
                                            const EstimatorConfig& cfg, MasterSeed seed);
VarianceEstimate subsampled_variance_single(const InputCollection& data,
                                            const SimulationModel& model, int model_index,
                                            const EstimatorConfig& cfg, RngStream base);

// max(sigma2, 0); the signed value stays in the estimate for diagnostics.
double truncate_nonnegative(const VarianceEstimate& estimate);

}  // namespace iuq
