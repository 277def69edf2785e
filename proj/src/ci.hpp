#pragma once

#include <string>
#include <vector>

#include "dataset.hpp"
#include "estimator.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace iuq {

// Inverse standard-normal CDF; absolute error below 1e-8 on [1e-10, 1-1e-10].
double normal_quantile(double p);

struct ConfidenceInterval {
  double center = 0.0;
  double halfwidth = 0.0;
  double level = 0.0;          // 1 - alpha
  double sigma_i2_used = 0.0;  // input variance after truncation at zero
  double sigma_s2_used = 0.0;  // simulation variance
  bool was_truncated = false;

  double lo() const { return center - halfwidth; }
  double hi() const { return center + halfwidth; }
  bool contains(double value) const { return lo() <= value && value <= hi(); }
};

struct CiResult {
  ConfidenceInterval interval;
  VarianceEstimate variance;     // signed estimate and diagnostics
  double point_tau2 = 0.0;       // sample variance of the point replications (splitting)
  long long point_reps = 0;      // 0 for the non-splitting interval
  std::vector<std::string> warnings;
};

// Splitting interval: the variance budget feeds the subsampled bootstrap, an
// independent batch of point_reps replications at the full empirical
// distributions gives the center; sigma_S^2 = (V/2 + tau~^2/2) / point_reps.
CiResult ci_splitting(const InputCollection& data, const SimulationModel& model,
                      const EstimatorConfig& var_budget, long long point_reps, double alpha,
                      MasterSeed seed);
CiResult ci_splitting(const InputCollection& data, const SimulationModel& model,
                      const EstimatorConfig& var_budget, long long point_reps, double alpha,
                      RngStream base);

// Non-splitting interval: one estimator run supplies everything; the grand
// mean doubles as the center and sigma_S^2 is the sample variance of the
// group means over B. Biased when subsamples are small; a warning is issued
// when the smallest subsample is below sqrt(n_bar).
CiResult ci_nonsplitting(const InputCollection& data, const SimulationModel& model,
                         const EstimatorConfig& var_budget, double alpha, MasterSeed seed);
CiResult ci_nonsplitting(const InputCollection& data, const SimulationModel& model,
                         const EstimatorConfig& var_budget, double alpha, RngStream base);

}  // namespace iuq
