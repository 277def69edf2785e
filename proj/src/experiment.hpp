#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ci.hpp"
#include "dataset.hpp"
#include "model.hpp"
#include "rng.hpp"

namespace iuq {

// A named true input distribution used to synthesize datasets.
struct GeneratorSpec {
  enum class Kind { exponential, uniform, constant };
  Kind kind = Kind::exponential;
  double param = 1.0;

  std::unique_ptr<InputSource> make() const;
  std::string to_string() const;

  // "exp:0.5", "uniform", "const:2.5"
  static GeneratorSpec parse(std::string_view text);
};

enum class CiMode { splitting, nonsplitting };
enum class ThetaRule { practical, theoretical, fixed };

struct ExperimentConfig {
  std::string model_name = "mm1";
  ModelParams model_params;

  std::vector<GeneratorSpec> generators;
  std::vector<long long> sizes;

  int trials = 1000;
  CiMode mode = CiMode::splitting;
  long long total_budget = 1500;

  ThetaRule theta_rule = ThetaRule::practical;
  double theta_fixed = 0.0;
  long long target_subsample = 30;
  double inner_multiplier = 1.0;

  std::optional<int> outer_b;
  std::optional<int> inner_r;
  double alpha = 0.05;
  double split_fraction = 2.0 / 3.0;

  std::optional<double> truth;
  long long truth_runs = 1'000'000;

  MasterSeed seed{12345};
  int workers = 1;

  // Flat key=value text; '#' starts a comment, blank lines ignored.
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig parse_file(const std::filesystem::path& path);
};

// (theta, B, R, point_reps) actually run, after applying the theta rule and,
// when B/R are not pinned, the budget allocation.
struct ResolvedDesign {
  double theta = 0.0;
  int outer_b = 0;
  int inner_r = 0;
  long long point_reps = 0;  // 0 in non-splitting mode
  long long leftover = 0;    // budget discarded by the B*R grid
};

ResolvedDesign resolve_design(const ExperimentConfig& cfg);

struct TruthEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long long runs = 0;
};

// Mean of `runs` replications driven directly by the true generators.
TruthEstimate estimate_truth(const SimulationModel& model,
                             std::span<const GeneratorSpec> generators, long long runs,
                             RngStream stream);

struct TrialRecord {
  int trial = 0;
  double center = 0.0;
  double halfwidth = 0.0;
  double sigma2_signed = 0.0;
  double sigma_i2_used = 0.0;
  double sigma_s2 = 0.0;
  bool covered = false;
  bool truncated = false;
};

struct CoverageReport {
  double coverage = 0.0;
  double mean_length = 0.0;
  double std_length = 0.0;
  double sigma_ratio = 0.0;  // mean of sigma_I / sigma_S over trials
  long long neg_var_count = 0;
  double bias = 0.0;  // mean(center) - truth
  long long trials = 0;

  double truth = 0.0;
  double truth_se = 0.0;
  double theta = 0.0;
  int outer_b = 0;
  int inner_r = 0;
  long long point_reps = 0;
  std::string mode;
  std::string config_echo;

  std::vector<TrialRecord> trial_log;
};

// Synthesizes `trials` independent datasets from the true generators, builds
// one CI per dataset, and aggregates coverage and diagnostics. Deterministic
// given the seed, at any worker count.
CoverageReport run_coverage_experiment(const ExperimentConfig& cfg);

// Shortest round-trip decimal formatting (also used by the CSV writers).
std::string format_double(double x);

std::string report_csv_header();
std::string report_csv_row(const CoverageReport& report);

// Appends one data row; writes the header first when the file is new/empty.
void write_report_csv(const CoverageReport& report, const std::filesystem::path& path);

// Per-trial records, one file per run.
void write_trace_csv(const CoverageReport& report, const std::filesystem::path& path);

// Human-readable one-row table in the style of a results table.
std::string format_report_table(const CoverageReport& report);

}  // namespace iuq
