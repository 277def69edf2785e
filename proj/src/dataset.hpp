#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "input_source.hpp"
#include "rng.hpp"

namespace iuq {

// Read-only view over a set of real observations, sampled uniformly.
class EmpiricalDist final : public InputSource {
 public:
  explicit EmpiricalDist(std::span<const double> values) : values_(values) {}

  double draw(RngStream& stream) const override;
  double mean() const override;

  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::span<const double> values_;
};

// Observations for one input model. Immutable after load; safe to share
// read-only across workers.
struct Dataset {
  std::vector<double> observations;

  std::size_t size() const { return observations.size(); }
  EmpiricalDist view() const { return EmpiricalDist(observations); }

  // One finite decimal real per line, blank lines ignored.
  static Dataset load_file(const std::filesystem::path& path);
  static Dataset from_values(std::vector<double> values);
};

// The m independent input datasets, indexed 1..m in the order added.
class InputCollection {
 public:
  void add(Dataset dataset);

  std::size_t model_count() const { return datasets_.size(); }
  const Dataset& dataset(std::size_t index_1based) const;

  std::vector<long long> sizes() const;
  double average_size() const;  // the scaling parameter n

 private:
  std::vector<Dataset> datasets_;
};

// Values drawn uniformly with replacement from a source dataset.
struct ResampledDistribution {
  std::vector<double> values;

  EmpiricalDist view() const { return EmpiricalDist(values); }
};

// s_i = floor(theta * n_i) for each i; rejects any s_i < 1 rather than
// clamping, since the statistics behind the rescaling need the subsample to
// grow with the data.
std::vector<long long> subsample_sizes(double theta, std::span<const long long> sizes);

// Exactly s values drawn uniformly with replacement; consumes s stream draws.
ResampledDistribution resample(const Dataset& dataset, long long s, RngStream& stream);

}  // namespace iuq
