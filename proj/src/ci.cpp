#include "ci.hpp"

#include <cmath>

#include "errors.hpp"
#include "stats.hpp"

namespace iuq {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;
constexpr double kSqrt2Pi = 2.5066282746310002;

// Lower-tail standard normal CDF, stable for z <= 0 (no cancellation).
double phi_lower(double z) {
  return 0.5 * std::erfc(-z / kSqrt2);
}

// Acklam's rational initial guess for the inverse normal CDF.
double acklam(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Solve Phi(z) = p for p in (0, 0.5]; z <= 0.
double quantile_lower_half(double p) {
  double z = acklam(p);
  // One Halley step on the CDF residual pushes the rational approximation
  // well past the 1e-8 contract.
  double pdf = std::exp(-0.5 * z * z) / kSqrt2Pi;
  double err = phi_lower(z) - p;
  double u = err / pdf;
  z -= u / (1.0 + 0.5 * u * z);
  return z;
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) {
    throw Error::invalid_parameter("normal quantile argument must lie in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  // 1-p is exact for p >= 0.5, so the two tails are computed by the same
  // path and quantile(p) + quantile(1-p) cancels exactly.
  if (p > 0.5) return -quantile_lower_half(1.0 - p);
  return quantile_lower_half(p);
}

namespace {

ConfidenceInterval make_interval(double center, double alpha, double sigma_i2_signed,
                                 double sigma_s2) {
  if (!(alpha > 0.0) || !(alpha < 1.0)) {
    throw Error::invalid_parameter("alpha must lie in (0, 1)");
  }
  ConfidenceInterval ci;
  ci.center = center;
  ci.level = 1.0 - alpha;
  ci.was_truncated = sigma_i2_signed < 0.0;
  ci.sigma_i2_used = ci.was_truncated ? 0.0 : sigma_i2_signed;
  ci.sigma_s2_used = sigma_s2;
  ci.halfwidth = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(ci.sigma_i2_used + ci.sigma_s2_used);
  return ci;
}

}  // namespace

CiResult ci_splitting(const InputCollection& data, const SimulationModel& model,
                      const EstimatorConfig& var_budget, long long point_reps, double alpha,
                      RngStream base) {
  if (point_reps < 2) {
    throw Error::invalid_parameter("point estimation needs at least two replications");
  }

  CiResult result;
  result.variance = subsampled_variance_bootstrap(data, model, var_budget, base);

  // Independent point estimate at the full empirical distributions.
  std::vector<EmpiricalDist> views;
  views.reserve(data.model_count());
  for (std::size_t i = 0; i < data.model_count(); ++i) {
    views.push_back(data.dataset(i + 1).view());
  }
  std::vector<const InputSource*> inputs;
  inputs.reserve(views.size());
  for (const auto& v : views) inputs.push_back(&v);

  std::vector<double> point(static_cast<std::size_t>(point_reps), 0.0);
  for (long long r = 1; r <= point_reps; ++r) {
    RngStream rstream = base.derive("pt", static_cast<std::uint64_t>(r));
    point[static_cast<std::size_t>(r - 1)] = replicate(model, inputs, rstream);
  }
  double center = kahan_mean(point);
  result.point_tau2 = sample_variance(point);
  result.point_reps = point_reps;

  // V and tau~^2 both estimate the simulation variance; average them with
  // equal weights.
  double sigma_s2 = (result.variance.within_group_v / 2.0 + result.point_tau2 / 2.0) /
                    static_cast<double>(point_reps);
  result.interval = make_interval(center, alpha, result.variance.sigma2, sigma_s2);
  return result;
}

CiResult ci_splitting(const InputCollection& data, const SimulationModel& model,
                      const EstimatorConfig& var_budget, long long point_reps, double alpha,
                      MasterSeed seed) {
  return ci_splitting(data, model, var_budget, point_reps, alpha, RngStream::from_seed(seed));
}

CiResult ci_nonsplitting(const InputCollection& data, const SimulationModel& model,
                         const EstimatorConfig& var_budget, double alpha, RngStream base) {
  CiResult result;
  result.variance = subsampled_variance_bootstrap(data, model, var_budget, base);

  double sigma_s2 = sample_variance(result.variance.group_means) /
                    static_cast<double>(var_budget.outer_b);
  result.interval = make_interval(result.variance.grand_mean, alpha, result.variance.sigma2,
                                  sigma_s2);

  // The grand mean inherits an O(1/s) resampling bias; flag configurations
  // where the smallest subsample falls below sqrt(n_bar).
  auto sizes = data.sizes();
  auto subs = subsample_sizes(var_budget.theta, sizes);
  long long s_min = subs[0];
  for (long long s : subs) s_min = std::min(s_min, s);
  double n_bar = data.average_size();
  if (static_cast<double>(s_min) < std::sqrt(n_bar)) {
    result.warnings.push_back(
        "non-splitting point estimate: smallest subsample " + std::to_string(s_min) +
        " is below sqrt(average data size) = " + std::to_string(std::sqrt(n_bar)) +
        "; the center may carry material bias");
  }
  return result;
}

CiResult ci_nonsplitting(const InputCollection& data, const SimulationModel& model,
                         const EstimatorConfig& var_budget, double alpha, MasterSeed seed) {
  return ci_nonsplitting(data, model, var_budget, alpha, RngStream::from_seed(seed));
}

}  // namespace iuq
