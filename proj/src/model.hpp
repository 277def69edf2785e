#pragma once

#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "input_source.hpp"
#include "rng.hpp"

namespace iuq {

// Single-server FIFO queue waiting-time update: W_{t+1} = max(W_t + S_t - A_t, 0),
// W_1 = 0. Returns the waiting time of customer T given T-1 interarrival gaps
// and T-1 service times.
double lindley_waiting_time(std::span<const double> interarrivals,
                            std::span<const double> services);

// Evaluation contract: one conditionally unbiased replication of the
// performance measure given the input distributions. Models are stateless;
// all randomness enters through the stream argument.
class SimulationModel {
 public:
  virtual ~SimulationModel() = default;

  virtual std::size_t arity() const = 0;
  virtual std::string_view name() const = 0;

  // True when a replication carries no simulation noise, i.e. the output is
  // a deterministic functional of the inputs.
  virtual bool deterministic_given_inputs() const { return false; }

  virtual double replicate(std::span<const InputSource* const> inputs,
                           RngStream& stream) const = 0;
};

// Arity-checked dispatch.
double replicate(const SimulationModel& model, std::span<const InputSource* const> inputs,
                 RngStream& stream);

// P(W_T > threshold) indicator for an empty-at-time-zero single-server queue;
// inputs are (interarrival distribution, service distribution). Consumes
// exactly 2(T-1) stream draws per replication.
class Mm1WaitModel final : public SimulationModel {
 public:
  explicit Mm1WaitModel(int num_customers = 20, double threshold = 2.0);

  std::size_t arity() const override { return 2; }
  std::string_view name() const override { return "mm1"; }
  double replicate(std::span<const InputSource* const> inputs,
                   RngStream& stream) const override;

  int num_customers() const { return num_customers_; }
  double threshold() const { return threshold_; }

 private:
  int num_customers_;
  double threshold_;
};

// Mean of one input distribution; ignores the others. Exact mode returns the
// distribution mean with zero simulation noise, noisy mode returns a single
// draw. The bootstrap variance of this functional is enumerable in closed
// form, which makes it the main estimator oracle.
class MeanFunctional final : public SimulationModel {
 public:
  explicit MeanFunctional(bool exact, std::size_t arity = 1, std::size_t target_1based = 1);

  std::size_t arity() const override { return arity_; }
  std::string_view name() const override { return "mean"; }
  bool deterministic_given_inputs() const override { return exact_; }
  double replicate(std::span<const InputSource* const> inputs,
                   RngStream& stream) const override;

 private:
  bool exact_;
  std::size_t arity_;
  std::size_t target_;  // 0-based
};

// Sum of the input distribution means; additive across models, so its
// per-model variance contributions are enumerable independently.
class SumOfMeansFunctional final : public SimulationModel {
 public:
  explicit SumOfMeansFunctional(bool exact, std::size_t arity);

  std::size_t arity() const override { return arity_; }
  std::string_view name() const override { return "summeans"; }
  bool deterministic_given_inputs() const override { return exact_; }
  double replicate(std::span<const InputSource* const> inputs,
                   RngStream& stream) const override;

 private:
  bool exact_;
  std::size_t arity_;
};

class ConstantModel final : public SimulationModel {
 public:
  explicit ConstantModel(double value, std::size_t arity = 1);

  std::size_t arity() const override { return arity_; }
  std::string_view name() const override { return "constant"; }
  bool deterministic_given_inputs() const override { return true; }
  double replicate(std::span<const InputSource* const> inputs,
                   RngStream& stream) const override;

 private:
  double value_;
  std::size_t arity_;
};

// Name-based registry so the CLI and the experiment config can select models.
using ModelParams = std::map<std::string, std::string, std::less<>>;
using ModelBuilder = std::function<std::unique_ptr<SimulationModel>(const ModelParams&)>;

void register_model(const std::string& name, ModelBuilder builder);
std::unique_ptr<SimulationModel> create_model(std::string_view name, const ModelParams& params);
std::vector<std::string> registered_models();

}  // namespace iuq
