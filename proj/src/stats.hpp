#pragma once

#include <cstddef>
#include <span>

#include "errors.hpp"

namespace iuq {

// Kahan compensated accumulator. The estimator subtracts near-equal sums of
// up to ~1e7 terms, so plain accumulation is not good enough.
class KahanSum {
 public:
  void add(double x) {
    double y = x - compensation_;
    double t = sum_ + y;
    compensation_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const { return sum_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

inline double kahan_mean(std::span<const double> xs) {
  if (xs.empty()) {
    throw Error::invalid_input("mean of empty sequence");
  }
  KahanSum s;
  for (double x : xs) s.add(x);
  return s.value() / static_cast<double>(xs.size());
}

inline double sum_squared_deviations(std::span<const double> xs, double center) {
  KahanSum s;
  for (double x : xs) {
    double d = x - center;
    s.add(d * d);
  }
  return s.value();
}

// Two-pass sample variance with divisor (n - ddof).
inline double sample_variance(std::span<const double> xs, std::size_t ddof = 1) {
  if (xs.size() <= ddof) {
    throw Error::invalid_input("sample_variance: not enough observations");
  }
  double m = kahan_mean(xs);
  return sum_squared_deviations(xs, m) / static_cast<double>(xs.size() - ddof);
}

}  // namespace iuq
