#include "model.hpp"

#include <algorithm>
#include <charconv>
#include <mutex>

#include "errors.hpp"
#include "stats.hpp"

namespace iuq {

double lindley_waiting_time(std::span<const double> interarrivals,
                            std::span<const double> services) {
  if (interarrivals.size() != services.size()) {
    throw Error::invalid_input("interarrival and service sequences must have equal length");
  }
  double w = 0.0;
  for (std::size_t t = 0; t < services.size(); ++t) {
    if (interarrivals[t] < 0.0 || services[t] < 0.0) {
      throw Error::invalid_input("interarrival and service times must be nonnegative");
    }
    w = std::max(w + services[t] - interarrivals[t], 0.0);
  }
  return w;
}

double replicate(const SimulationModel& model, std::span<const InputSource* const> inputs,
                 RngStream& stream) {
  if (inputs.size() != model.arity()) {
    throw Error::invalid_input("model '" + std::string(model.name()) + "' expects " +
                               std::to_string(model.arity()) + " input distributions, got " +
                               std::to_string(inputs.size()));
  }
  return model.replicate(inputs, stream);
}

Mm1WaitModel::Mm1WaitModel(int num_customers, double threshold)
    : num_customers_(num_customers), threshold_(threshold) {
  if (num_customers < 1) {
    throw Error::invalid_parameter("number of customers must be >= 1");
  }
}

double Mm1WaitModel::replicate(std::span<const InputSource* const> inputs,
                               RngStream& stream) const {
  const auto steps = static_cast<std::size_t>(num_customers_ - 1);
  // A_t and S_t are consumed in lockstep, one pair per recursion step, so a
  // replication always costs exactly 2(T-1) draws.
  double w = 0.0;
  for (std::size_t t = 0; t < steps; ++t) {
    double a = inputs[0]->draw(stream);
    double s = inputs[1]->draw(stream);
    w = std::max(w + s - a, 0.0);
  }
  return w > threshold_ ? 1.0 : 0.0;
}

MeanFunctional::MeanFunctional(bool exact, std::size_t arity, std::size_t target_1based)
    : exact_(exact), arity_(arity), target_(target_1based - 1) {
  if (arity < 1 || target_1based < 1 || target_1based > arity) {
    throw Error::invalid_parameter("mean functional target index out of range");
  }
}

double MeanFunctional::replicate(std::span<const InputSource* const> inputs,
                                 RngStream& stream) const {
  return exact_ ? inputs[target_]->mean() : inputs[target_]->draw(stream);
}

SumOfMeansFunctional::SumOfMeansFunctional(bool exact, std::size_t arity)
    : exact_(exact), arity_(arity) {
  if (arity < 1) {
    throw Error::invalid_parameter("summeans arity must be >= 1");
  }
}

double SumOfMeansFunctional::replicate(std::span<const InputSource* const> inputs,
                                       RngStream& stream) const {
  KahanSum sum;
  for (const InputSource* in : inputs) {
    sum.add(exact_ ? in->mean() : in->draw(stream));
  }
  return sum.value();
}

ConstantModel::ConstantModel(double value, std::size_t arity) : value_(value), arity_(arity) {
  if (arity < 1) {
    throw Error::invalid_parameter("constant model arity must be >= 1");
  }
}

double ConstantModel::replicate(std::span<const InputSource* const>, RngStream&) const {
  return value_;
}

namespace {

std::mutex g_registry_mutex;

std::map<std::string, ModelBuilder, std::less<>>& registry() {
  static std::map<std::string, ModelBuilder, std::less<>> models;
  return models;
}

long param_long(const ModelParams& params, std::string_view key, long fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  long value = 0;
  auto [ptr, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), value);
  if (ec != std::errc{} || ptr != it->second.data() + it->second.size()) {
    throw Error::invalid_parameter("model parameter '" + std::string(key) +
                                   "' must be an integer, got '" + it->second + "'");
  }
  return value;
}

double param_double(const ModelParams& params, std::string_view key, double fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  try {
    std::size_t consumed = 0;
    double v = std::stod(it->second, &consumed);
    if (consumed != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw Error::invalid_parameter("model parameter '" + std::string(key) +
                                   "' must be a real, got '" + it->second + "'");
  }
}

bool param_flag(const ModelParams& params, std::string_view key, bool fallback) {
  auto it = params.find(key);
  if (it == params.end()) return fallback;
  if (it->second == "1" || it->second == "true" || it->second == "yes") return true;
  if (it->second == "0" || it->second == "false" || it->second == "no") return false;
  throw Error::invalid_parameter("model parameter '" + std::string(key) +
                                 "' must be a boolean, got '" + it->second + "'");
}

void register_builtins() {
  register_model("mm1", [](const ModelParams& p) -> std::unique_ptr<SimulationModel> {
    return std::make_unique<Mm1WaitModel>(static_cast<int>(param_long(p, "customers", 20)),
                                          param_double(p, "threshold", 2.0));
  });
  register_model("mean", [](const ModelParams& p) -> std::unique_ptr<SimulationModel> {
    auto arity = static_cast<std::size_t>(param_long(p, "arity", 1));
    auto target = static_cast<std::size_t>(param_long(p, "target", 1));
    return std::make_unique<MeanFunctional>(param_flag(p, "exact", false), arity, target);
  });
  register_model("summeans", [](const ModelParams& p) -> std::unique_ptr<SimulationModel> {
    auto arity = static_cast<std::size_t>(param_long(p, "arity", 1));
    return std::make_unique<SumOfMeansFunctional>(param_flag(p, "exact", false), arity);
  });
  register_model("constant", [](const ModelParams& p) -> std::unique_ptr<SimulationModel> {
    auto arity = static_cast<std::size_t>(param_long(p, "arity", 1));
    return std::make_unique<ConstantModel>(param_double(p, "value", 0.0), arity);
  });
}

std::once_flag g_builtins_once;

void ensure_builtins() {
  std::call_once(g_builtins_once, register_builtins);
}

}  // namespace

void register_model(const std::string& name, ModelBuilder builder) {
  std::lock_guard lock(g_registry_mutex);
  registry()[name] = std::move(builder);
}

std::unique_ptr<SimulationModel> create_model(std::string_view name, const ModelParams& params) {
  ensure_builtins();
  std::lock_guard lock(g_registry_mutex);
  auto it = registry().find(name);
  if (it == registry().end()) {
    throw Error::unknown_model("unknown model '" + std::string(name) + "'");
  }
  return it->second(params);
}

std::vector<std::string> registered_models() {
  ensure_builtins();
  std::lock_guard lock(g_registry_mutex);
  std::vector<std::string> names;
  for (const auto& [name, _] : registry()) names.push_back(name);
  return names;
}

}  // namespace iuq
