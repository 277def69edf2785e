#include "estimator.hpp"

#include <string>

#include "errors.hpp"
#include "stats.hpp"

namespace iuq {

namespace {

void validate_config(const EstimatorConfig& cfg, const InputCollection& data,
                     const SimulationModel& model) {
  if (cfg.outer_b < 2) {
    throw Error::invalid_parameter("outer resample count B must be >= 2");
  }
  if (cfg.inner_r < 2) {
    throw Error::invalid_parameter("inner replication count R must be >= 2");
  }
  if (!(cfg.theta > 0.0) || !(cfg.theta <= 1.0)) {
    throw Error::invalid_parameter("subsample ratio must lie in (0, 1]");
  }
  if (data.model_count() != model.arity()) {
    throw Error::invalid_input("model '" + std::string(model.name()) + "' expects " +
                               std::to_string(model.arity()) + " input models, data has " +
                               std::to_string(data.model_count()));
  }
  if (cfg.target_model) {
    int i = *cfg.target_model;
    if (i < 1 || static_cast<std::size_t>(i) > data.model_count()) {
      throw Error::invalid_parameter("target input model index out of range: " +
                                     std::to_string(i));
    }
  }
}

// Two-layer loop shared by all three estimator entry points. Accumulation
// order is fixed (by b, then r) so results do not depend on scheduling.
VarianceEstimate run_two_layer(const InputCollection& data, const SimulationModel& model,
                               const EstimatorConfig& cfg, RngStream base) {
  validate_config(cfg, data, model);

  const std::size_t m = data.model_count();
  const int B = cfg.outer_b;
  const int R = cfg.inner_r;

  // Which datasets get resampled, and at what size.
  std::vector<bool> resampled(m, true);
  if (cfg.target_model) {
    resampled.assign(m, false);
    resampled[static_cast<std::size_t>(*cfg.target_model) - 1] = true;
  }
  std::vector<long long> sub_sizes(m, 0);
  {
    auto full = data.sizes();
    for (std::size_t i = 0; i < m; ++i) {
      if (!resampled[i]) continue;
      long long size_arr[1] = {full[i]};
      sub_sizes[i] = subsample_sizes(cfg.theta, size_arr)[0];
    }
  }

  std::vector<EmpiricalDist> full_views;
  full_views.reserve(m);
  for (std::size_t i = 0; i < m; ++i) full_views.push_back(data.dataset(i + 1).view());

  std::vector<double> group_means(static_cast<std::size_t>(B), 0.0);
  KahanSum within_ss_total;
  std::vector<double> reps(static_cast<std::size_t>(R), 0.0);
  std::vector<ResampledDistribution> res(m);
  std::vector<EmpiricalDist> res_views;
  res_views.reserve(m);  // stable addresses for the inputs array below
  std::vector<const InputSource*> inputs(m, nullptr);

  for (int b = 1; b <= B; ++b) {
    RngStream bstream = base.derive("b", static_cast<std::uint64_t>(b));

    res_views.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (resampled[i]) {
        RngStream rs = bstream.derive("resample", static_cast<std::uint64_t>(i + 1));
        res[i] = resample(data.dataset(i + 1), sub_sizes[i], rs);
        res_views.push_back(res[i].view());
        inputs[i] = &res_views.back();
      } else {
        inputs[i] = &full_views[i];
      }
    }

    for (int r = 1; r <= R; ++r) {
      RngStream rstream = bstream.derive("r", static_cast<std::uint64_t>(r));
      reps[static_cast<std::size_t>(r - 1)] = replicate(model, inputs, rstream);
    }

    double mean_b = kahan_mean(reps);
    group_means[static_cast<std::size_t>(b - 1)] = mean_b;
    within_ss_total.add(sum_squared_deviations(reps, mean_b));
  }

  VarianceEstimate est;
  est.group_means = std::move(group_means);
  est.within_group_v =
      within_ss_total.value() / (static_cast<double>(B) * static_cast<double>(R - 1));
  est.grand_mean = kahan_mean(est.group_means);
  est.sigma2 = cfg.theta * between_minus_within(est.group_means, est.within_group_v, R);
  est.budget_used = static_cast<long long>(B) * static_cast<long long>(R);
  est.theta = cfg.theta;
  est.target_model = cfg.target_model;
  return est;
}

}  // namespace

double between_minus_within(std::span<const double> group_means, double v, int r) {
  const auto b = group_means.size();
  if (b < 2) {
    throw Error::invalid_parameter("between_minus_within needs at least two groups");
  }
  if (r < 2) {
    throw Error::invalid_parameter("inner replication count must be >= 2");
  }
  if (v < 0.0) {
    throw Error::invalid_parameter("within-group variance must be nonnegative");
  }
  double grand = kahan_mean(group_means);
  double between = sum_squared_deviations(group_means, grand) / static_cast<double>(b - 1);
  return between - v / static_cast<double>(r);
}

double within_group_variance(std::span<const std::vector<double>> groups) {
  if (groups.empty()) {
    throw Error::invalid_parameter("within_group_variance needs at least one group");
  }
  const std::size_t r = groups.front().size();
  if (r < 2) {
    throw Error::invalid_parameter("within_group_variance needs R >= 2 replications");
  }
  KahanSum total;
  for (const auto& g : groups) {
    if (g.size() != r) {
      throw Error::invalid_input("replication groups must have equal size");
    }
    total.add(sum_squared_deviations(g, kahan_mean(g)));
  }
  return total.value() / (static_cast<double>(groups.size()) * static_cast<double>(r - 1));
}

VarianceEstimate variance_bootstrap(const InputCollection& data, const SimulationModel& model,
                                    const EstimatorConfig& cfg, RngStream base) {
  if (cfg.theta != 1.0) {
    throw Error::invalid_parameter("variance_bootstrap requires theta = 1");
  }
  if (cfg.target_model) {
    throw Error::invalid_parameter("variance_bootstrap resamples all input models");
  }
  return run_two_layer(data, model, cfg, base);
}

VarianceEstimate variance_bootstrap(const InputCollection& data, const SimulationModel& model,
                                    const EstimatorConfig& cfg, MasterSeed seed) {
  return variance_bootstrap(data, model, cfg, RngStream::from_seed(seed));
}

VarianceEstimate subsampled_variance_bootstrap(const InputCollection& data,
                                               const SimulationModel& model,
                                               const EstimatorConfig& cfg, RngStream base) {
  if (cfg.target_model) {
    throw Error::invalid_parameter(
        "subsampled_variance_bootstrap resamples all input models; use "
        "subsampled_variance_single for a single model");
  }
  return run_two_layer(data, model, cfg, base);
}

VarianceEstimate subsampled_variance_bootstrap(const InputCollection& data,
                                               const SimulationModel& model,
                                               const EstimatorConfig& cfg, MasterSeed seed) {
  return subsampled_variance_bootstrap(data, model, cfg, RngStream::from_seed(seed));
}

VarianceEstimate subsampled_variance_single(const InputCollection& data,
                                            const SimulationModel& model, int model_index,
                                            const EstimatorConfig& cfg, RngStream base) {
  EstimatorConfig single = cfg;
  single.target_model = model_index;
  return run_two_layer(data, model, single, base);
}

VarianceEstimate subsampled_variance_single(const InputCollection& data,
                                            const SimulationModel& model, int model_index,
                                            const EstimatorConfig& cfg, MasterSeed seed) {
  return subsampled_variance_single(data, model, model_index, cfg, RngStream::from_seed(seed));
}

double truncate_nonnegative(const VarianceEstimate& estimate) {
  return estimate.sigma2 > 0.0 ? estimate.sigma2 : 0.0;
}

}  // namespace iuq
