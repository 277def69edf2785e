#include "allocation.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"

namespace iuq {

double practical_ratio(std::span<const long long> sizes, long long target_subsample) {
  if (target_subsample < 2) {
    throw Error::invalid_parameter("target subsample must be >= 2");
  }
  if (sizes.empty()) {
    throw Error::invalid_input("practical_ratio needs at least one dataset size");
  }
  long long n_min = sizes[0];
  for (long long n : sizes) {
    if (n < 1) {
      throw Error::invalid_input("dataset size must be >= 1");
    }
    n_min = std::min(n_min, n);
  }
  return std::min(1.0, static_cast<double>(target_subsample) / static_cast<double>(n_min));
}

double theoretical_ratio(long long total_budget, double n_bar) {
  if (total_budget < 1) {
    throw Error::invalid_parameter("simulation budget must be >= 1");
  }
  if (!(n_bar >= 1.0)) {
    throw Error::invalid_parameter("average data size must be >= 1");
  }
  double theta = std::min(std::cbrt(static_cast<double>(total_budget)), std::sqrt(n_bar)) / n_bar;
  return std::min(theta, 1.0);
}

AllocationPlan allocate(long long total_budget, double theta, double n_bar,
                        double inner_multiplier, std::string rule_used) {
  if (total_budget < 4) {
    throw Error::budget_too_small("total budget must be >= 4 to fit B >= 2, R >= 2");
  }
  if (!(theta > 0.0) || !(theta <= 1.0)) {
    throw Error::invalid_parameter("subsample ratio must lie in (0, 1]");
  }
  if (!(theta * n_bar >= 1.0)) {
    throw Error::invalid_parameter("theta * n_bar must be >= 1 (empty subsamples otherwise)");
  }
  if (!(inner_multiplier > 0.0)) {
    throw Error::invalid_parameter("inner multiplier must be positive");
  }

  const long long max_r = total_budget / 2;
  // Clamp in floating point first; llround on values beyond the cap is not
  // needed and can overflow for absurd multipliers.
  double r_real = std::min(inner_multiplier * theta * n_bar, static_cast<double>(max_r));
  long long r = std::max(std::llround(r_real), 2LL);
  long long b = total_budget / r;
  if (b < 2) {
    throw Error::budget_too_small("budget too small for two outer resamples");
  }

  AllocationPlan plan;
  plan.outer_b = static_cast<int>(b);
  plan.inner_r = static_cast<int>(r);
  plan.theta = theta;
  plan.n_target = total_budget;
  plan.n_bar = n_bar;
  plan.rule_used = std::move(rule_used);
  return plan;
}

double theoretical_inner_size(double theta, double tau2_pilot, double input_var_pilot) {
  if (!(theta > 0.0) || !(theta <= 1.0)) {
    throw Error::invalid_parameter("subsample ratio must lie in (0, 1]");
  }
  if (!(tau2_pilot > 0.0) || !(input_var_pilot > 0.0)) {
    throw Error::invalid_parameter("pilot variance estimates must be positive");
  }
  return theta * tau2_pilot / input_var_pilot;
}

std::vector<std::string> validate_consistency_regime(int outer_b, int inner_r, double theta,
                                                     double n_bar) {
  std::vector<std::string> warnings;
  double subsample = theta * n_bar;
  if (subsample < 5.0) {
    warnings.push_back("subsample too small: theta*n = " + std::to_string(subsample) +
                       " < 5; the rescaled estimate may be badly biased");
  }
  if (outer_b < 10) {
    warnings.push_back("outer size small: B = " + std::to_string(outer_b) +
                       " < 10; the between-group variance is noisy");
  }
  double lhs = static_cast<double>(outer_b) * static_cast<double>(inner_r) * inner_r;
  if (lhs < subsample * subsample) {
    warnings.push_back("inner budget below consistency scaling: B*R^2 = " + std::to_string(lhs) +
                       " < (theta*n)^2 = " + std::to_string(subsample * subsample));
  }
  return warnings;
}

}  // namespace iuq
