#pragma once

#include <span>
#include <string>
#include <vector>

namespace iuq {

// Concrete (B, R, theta) for a total simulation budget. The consistency and
// optimality results fix only orders of growth; the hidden constants are
// surfaced as explicit knobs (target_subsample, inner_multiplier).
struct AllocationPlan {
  int outer_b = 0;
  int inner_r = 0;
  double theta = 0.0;
  long long n_target = 0;
  double n_bar = 0.0;
  std::string rule_used = "fixed";

  // Budget not spent by the B*R grid; discarded, never silently reassigned.
  long long leftover() const {
    return n_target - static_cast<long long>(outer_b) * inner_r;
  }
};

// theta = min(1, target / min_i n_i): the smallest dataset's subsample lands
// near the target count.
double practical_ratio(std::span<const long long> sizes, long long target_subsample = 30);

// theta = min(N^{1/3}, n_bar^{1/2}) / n_bar, clamped to (0, 1].
double theoretical_ratio(long long total_budget, double n_bar);

// R = clamp(round(inner_multiplier * theta * n_bar), 2, floor(N/2)), B = floor(N/R).
AllocationPlan allocate(long long total_budget, double theta, double n_bar,
                        double inner_multiplier = 1.0, std::string rule_used = "fixed");

// Pilot-based optimal inner size theta * tau2 / input_var; the caller rounds
// and clamps through allocate(). Pilot estimates carry their own error, which
// this function does not attempt to quantify.
double theoretical_inner_size(double theta, double tau2_pilot, double input_var_pilot);

// Finite-sample heuristics for the relative-consistency scaling conditions.
// Warns, never blocks.
std::vector<std::string> validate_consistency_regime(int outer_b, int inner_r, double theta,
                                                     double n_bar);

}  // namespace iuq
