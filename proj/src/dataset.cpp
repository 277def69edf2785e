#include "dataset.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include "errors.hpp"
#include "stats.hpp"

namespace iuq {

double EmpiricalDist::draw(RngStream& stream) const {
  if (values_.empty()) {
    throw Error::invalid_input("draw from empty distribution");
  }
  return values_[stream.draw_index(values_.size())];
}

double EmpiricalDist::mean() const {
  return kahan_mean(values_);
}

Dataset Dataset::from_values(std::vector<double> values) {
  if (values.empty()) {
    throw Error::invalid_input("dataset must contain at least one observation");
  }
  for (double v : values) {
    if (!std::isfinite(v)) {
      throw Error::invalid_input("dataset observations must be finite");
    }
  }
  return Dataset{std::move(values)};
}

Dataset Dataset::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error::io_error("cannot open dataset file: " + path.string());
  }
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Trim whitespace; skip blank lines.
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    std::string token = line.substr(begin, end - begin + 1);

    std::size_t consumed = 0;
    double v = 0;
    try {
      v = std::stod(token, &consumed);
    } catch (const std::exception&) {
      throw Error::io_error(path.string() + ":" + std::to_string(line_no) +
                            ": not a real number: '" + token + "'");
    }
    if (consumed != token.size()) {
      throw Error::io_error(path.string() + ":" + std::to_string(line_no) +
                            ": trailing characters after number: '" + token + "'");
    }
    if (!std::isfinite(v)) {
      throw Error::invalid_input(path.string() + ":" + std::to_string(line_no) +
                                 ": observation must be finite");
    }
    values.push_back(v);
  }
  if (values.empty()) {
    throw Error::invalid_input("dataset file has no observations: " + path.string());
  }
  return Dataset{std::move(values)};
}

void InputCollection::add(Dataset dataset) {
  if (dataset.observations.empty()) {
    throw Error::invalid_input("dataset must contain at least one observation");
  }
  datasets_.push_back(std::move(dataset));
}

const Dataset& InputCollection::dataset(std::size_t index_1based) const {
  if (index_1based < 1 || index_1based > datasets_.size()) {
    throw Error::invalid_parameter("input model index out of range: " +
                                   std::to_string(index_1based));
  }
  return datasets_[index_1based - 1];
}

std::vector<long long> InputCollection::sizes() const {
  std::vector<long long> out;
  out.reserve(datasets_.size());
  for (const auto& d : datasets_) out.push_back(static_cast<long long>(d.size()));
  return out;
}

double InputCollection::average_size() const {
  if (datasets_.empty()) {
    throw Error::invalid_input("input collection is empty");
  }
  long long total = 0;
  for (const auto& d : datasets_) total += static_cast<long long>(d.size());
  return static_cast<double>(total) / static_cast<double>(datasets_.size());
}

std::vector<long long> subsample_sizes(double theta, std::span<const long long> sizes) {
  if (!(theta > 0.0) || !(theta <= 1.0)) {
    throw Error::invalid_parameter("subsample ratio must lie in (0, 1]");
  }
  std::vector<long long> out;
  out.reserve(sizes.size());
  for (long long n : sizes) {
    if (n < 1) {
      throw Error::invalid_input("dataset size must be >= 1");
    }
    // Nudge before flooring: decimal ratios like 30/2000 are not exactly
    // representable and theta*n can land a few ulps below an integer.
    auto s = static_cast<long long>(std::floor(theta * static_cast<double>(n) + 1e-9));
    if (s < 1) {
      throw Error::subsample_too_small(
          "subsample ratio " + std::to_string(theta) + " gives an empty subsample for n=" +
          std::to_string(n));
    }
    out.push_back(s);
  }
  return out;
}

ResampledDistribution resample(const Dataset& dataset, long long s, RngStream& stream) {
  if (dataset.observations.empty()) {
    throw Error::invalid_input("cannot resample an empty dataset");
  }
  if (s < 1) {
    throw Error::invalid_parameter("resample size must be >= 1");
  }
  ResampledDistribution out;
  out.values.resize(static_cast<std::size_t>(s));
  const auto n = dataset.observations.size();
  for (auto& v : out.values) {
    v = dataset.observations[stream.draw_index(n)];
  }
  return out;
}

}  // namespace iuq
