#pragma once

#include "rng.hpp"

namespace iuq {

// Anything a simulation model can sample a variate from: an empirical
// distribution (full data or a resample) or a known parametric generator.
// Models run identically on either, which is what lets the same code drive
// ground-truth estimation and bootstrap replications.
class InputSource {
 public:
  virtual ~InputSource() = default;

  // One i.i.d. variate; consumes exactly one stream draw unless the source
  // is degenerate.
  virtual double draw(RngStream& stream) const = 0;

  // Exact mean of the source (analytic for generators, the arithmetic mean
  // of the stored values for empirical distributions).
  virtual double mean() const = 0;
};

class ExponentialSource final : public InputSource {
 public:
  explicit ExponentialSource(double rate) : rate_(rate) {}
  double draw(RngStream& stream) const override { return stream.next_exponential(rate_); }
  double mean() const override { return 1.0 / rate_; }
  double rate() const { return rate_; }

 private:
  double rate_;
};

class UniformSource final : public InputSource {
 public:
  double draw(RngStream& stream) const override { return stream.next_uniform(); }
  double mean() const override { return 0.5; }
};

class ConstantSource final : public InputSource {
 public:
  explicit ConstantSource(double value) : value_(value) {}
  double draw(RngStream&) const override { return value_; }
  double mean() const override { return value_; }

 private:
  double value_;
};

}  // namespace iuq
