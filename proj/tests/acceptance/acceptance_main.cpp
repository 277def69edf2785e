// End-to-end acceptance suite. Each criterion prints one PASS/FAIL line with
// the measured values; the exit code is the number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "allocation.hpp"
#include "ci.hpp"
#include "dataset.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "experiment.hpp"
#include "model.hpp"
#include "rng.hpp"
#include "stats.hpp"

using namespace iuq;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int criterion, bool pass, const std::string& text, double seconds) {
  if (!pass) ++g_failures;
  std::printf("[%2d] %s  %s  (%.1fs)\n", criterion, pass ? "PASS" : "FAIL", text.c_str(), seconds);
  std::fflush(stdout);
}

std::string fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

// ---- reference oracle for the normal quantile (bisection on a long-double
// CDF built from an erf series and an erfc continued fraction) --------------

long double oracle_erf_series(long double x) {
  const long double two_over_sqrt_pi = 1.12837916709551257390L;
  long double term = x, sum = x;
  for (int k = 1; k < 200; ++k) {
    term *= -x * x / k;
    long double contrib = term / (2 * k + 1);
    sum += contrib;
    if (std::fabs(contrib) < 1e-24L * std::fabs(sum)) break;
  }
  return two_over_sqrt_pi * sum;
}

long double oracle_erfc_cf(long double x) {
  const long double tiny = 1e-30L;
  long double f = x, c = x, d = 0.0L;
  for (int k = 1; k < 300; ++k) {
    long double a = k / 2.0L;
    d = x + a * d;
    if (std::fabs(d) < tiny) d = tiny;
    c = x + a / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0L / d;
    long double delta = c * d;
    f *= delta;
    if (std::fabs(delta - 1.0L) < 1e-22L) break;
  }
  const long double one_over_sqrt_pi = 0.564189583547756286948L;
  return std::exp(-x * x) * one_over_sqrt_pi / f;
}

long double oracle_normal_cdf(long double z) {
  const long double inv_sqrt2 = 0.707106781186547524401L;
  if (z <= -2.0L) return 0.5L * oracle_erfc_cf(-z * inv_sqrt2);
  if (z >= 2.0L) return 1.0L - 0.5L * oracle_erfc_cf(z * inv_sqrt2);
  return 0.5L * (1.0L + oracle_erf_series(z * inv_sqrt2));
}

double oracle_normal_quantile(double p) {
  long double lo = -40.0L, hi = 40.0L;
  for (int i = 0; i < 200; ++i) {
    long double mid = 0.5L * (lo + hi);
    (oracle_normal_cdf(mid) < static_cast<long double>(p) ? lo : hi) = mid;
  }
  return static_cast<double>(0.5L * (lo + hi));
}

// ---- exact enumeration oracle for resampling variances ---------------------

double enumerated_resample_mean_variance(const std::vector<double>& data, int s) {
  const auto n = data.size();
  std::vector<std::size_t> odometer(static_cast<std::size_t>(s), 0);
  long double sum = 0.0L, sum_sq = 0.0L;
  long long count = 0;
  while (true) {
    long double mean = 0.0L;
    for (auto idx : odometer) mean += data[idx];
    mean /= s;
    sum += mean;
    sum_sq += mean * mean;
    ++count;
    std::size_t pos = 0;
    while (pos < odometer.size() && ++odometer[pos] == n) {
      odometer[pos] = 0;
      ++pos;
    }
    if (pos == odometer.size()) break;
  }
  long double grand = sum / count;
  return static_cast<double>(sum_sq / count - grand * grand);
}

// ---- shared experiment configs ---------------------------------------------

ExperimentConfig queue_experiment(long long n1, long long n2) {
  ExperimentConfig cfg;
  cfg.model_name = "mm1";
  cfg.model_params = {{"customers", "20"}, {"threshold", "2.0"}};
  cfg.generators = {GeneratorSpec::parse("exp:0.5"), GeneratorSpec::parse("exp:1")};
  cfg.sizes = {n1, n2};
  cfg.trials = 1000;
  cfg.total_budget = 1500;
  cfg.alpha = 0.05;
  cfg.workers = 1;
  return cfg;
}

InputCollection queue_data(std::size_t n1, std::size_t n2, std::uint64_t seed) {
  RngStream root = RngStream::from_seed({seed});
  std::vector<double> inter(n1), service(n2);
  RngStream g1 = root.derive("data", 1);
  for (auto& v : inter) v = g1.next_exponential(0.5);
  RngStream g2 = root.derive("data", 2);
  for (auto& v : service) v = g2.next_exponential(1.0);
  InputCollection data;
  data.add(Dataset::from_values(std::move(inter)));
  data.add(Dataset::from_values(std::move(service)));
  return data;
}

// ---- criteria ---------------------------------------------------------------

void criterion_1_truth() {
  Timer timer;
  Mm1WaitModel model(20, 2.0);
  std::vector<GeneratorSpec> gens{GeneratorSpec::parse("exp:0.5"), GeneratorSpec::parse("exp:1")};
  auto truth = estimate_truth(model, gens, 1'000'000, RngStream::from_seed({9001}).derive("truth"));
  double elapsed = timer.seconds();
  bool pass = std::abs(truth.value - 0.182) <= 0.004 && elapsed < 10.0;
  report(1, pass,
         fmt("exceedance probability over 1e6 runs: %.5f (se %.5f), expected 0.182 +- 0.004",
             truth.value, truth.std_error),
         elapsed);
}

struct RowResult {
  CoverageReport report;
};

RowResult run_row(ExperimentConfig cfg) {
  RowResult row;
  row.report = run_coverage_experiment(cfg);
  return row;
}

void criterion_2_and_3_tables() {
  struct Expect {
    long long n1, n2;
    double coverage, mean_length;
  };
  const Expect subsampled_rows[] = {
      {600, 300, 0.947, 0.158}, {2000, 1000, 0.938, 0.103}, {4000, 2000, 0.949, 0.087}};

  // Subsampled splitting rows: theta = 30/n2, B=50, R=20.
  std::vector<CoverageReport> table2;
  {
    bool pass = true;
    std::string detail;
    Timer timer;
    for (const auto& row : subsampled_rows) {
      Timer row_timer;
      ExperimentConfig cfg = queue_experiment(row.n1, row.n2);
      cfg.mode = CiMode::splitting;
      cfg.theta_rule = ThetaRule::practical;
      cfg.target_subsample = 30;
      cfg.outer_b = 50;
      cfg.inner_r = 20;
      cfg.seed = MasterSeed{52000 + static_cast<std::uint64_t>(row.n1)};
      auto rep = run_coverage_experiment(cfg);
      table2.push_back(rep);
      double row_seconds = row_timer.seconds();
      bool row_ok = std::abs(rep.coverage - row.coverage) <= 0.03 &&
                    std::abs(rep.mean_length / row.mean_length - 1.0) <= 0.10 &&
                    rep.neg_var_count <= 5 && row_seconds < 300.0;
      pass = pass && row_ok;
      detail += fmt("[n=(%lld,%lld): cov %.3f vs %.3f, len %.3f vs %.3f, neg %lld] ", row.n1,
                    row.n2, rep.coverage, row.coverage, rep.mean_length, row.mean_length,
                    static_cast<long long>(rep.neg_var_count));
    }
    report(2, pass, "subsampled splitting rows reproduce coverage/length/negatives: " + detail,
           timer.seconds());
  }

  // Full-bootstrap contrast rows at the same budget: many negatives, fat
  // spread of CI lengths.
  {
    bool pass = true;
    std::string detail;
    Timer timer;
    const long long rows[][2] = {{600, 300}, {2000, 1000}};
    for (int i = 0; i < 2; ++i) {
      ExperimentConfig cfg = queue_experiment(rows[i][0], rows[i][1]);
      cfg.mode = CiMode::splitting;
      cfg.theta_rule = ThetaRule::fixed;
      cfg.theta_fixed = 1.0;
      cfg.outer_b = 50;
      cfg.inner_r = 20;
      cfg.seed = MasterSeed{53000 + static_cast<std::uint64_t>(rows[i][0])};
      auto rep = run_coverage_experiment(cfg);
      double ratio = rep.std_length / table2[static_cast<std::size_t>(i)].std_length;
      bool row_ok = rep.neg_var_count > 150 && ratio >= 2.0;
      pass = pass && row_ok;
      detail += fmt("[n=(%lld,%lld): neg %lld (>150), std-length ratio %.2f (>=2)] ", rows[i][0],
                    rows[i][1], static_cast<long long>(rep.neg_var_count), ratio);
    }
    report(3, pass, "full bootstrap at the same budget degrades as expected: " + detail,
           timer.seconds());
  }
}

void criterion_4_nonsplit_bias() {
  Timer timer;
  ExperimentConfig cfg = queue_experiment(4000, 2000);
  cfg.mode = CiMode::nonsplitting;
  cfg.theta_rule = ThetaRule::theoretical;
  cfg.outer_b = 100;
  cfg.inner_r = 15;
  cfg.seed = MasterSeed{54000};
  auto rep = run_coverage_experiment(cfg);
  bool pass = rep.bias >= 0.02 && rep.coverage <= 0.88;
  report(4, pass,
         fmt("non-splitting with tiny subsamples under-covers: bias %.4f (>=0.02), coverage %.3f "
             "(<=0.88)",
             rep.bias, rep.coverage),
         timer.seconds());
}

void criterion_5_unbiasedness() {
  Timer timer;
  std::vector<double> values{1.0, 2.0, 3.0};
  const double theta = 2.0 / 3.0;
  double oracle = theta * enumerated_resample_mean_variance(values, 2);

  InputCollection data;
  data.add(Dataset::from_values(values));
  MeanFunctional model(true);
  EstimatorConfig cfg{.outer_b = 10, .inner_r = 2, .theta = theta};

  const int runs = 10000;
  std::vector<double> estimates(runs);
  for (int i = 0; i < runs; ++i) {
    estimates[i] =
        subsampled_variance_bootstrap(data, model, cfg, MasterSeed{static_cast<std::uint64_t>(i)})
            .sigma2;
  }
  double mean = kahan_mean(estimates);
  double se = std::sqrt(sample_variance(estimates) / runs);
  double elapsed = timer.seconds();
  bool pass = std::abs(mean - oracle) < 3.0 * se && elapsed < 5.0;
  report(5, pass,
         fmt("estimator mean %.6f vs enumeration oracle %.6f (39 resamples), |diff| %.2g < 3se "
             "%.2g",
             mean, oracle, std::abs(mean - oracle), 3.0 * se),
         elapsed);
}

void criterion_6_theta_one_reduction() {
  Timer timer;
  auto data = queue_data(60, 30, 606);
  Mm1WaitModel model(20, 2.0);
  EstimatorConfig cfg{.outer_b = 10, .inner_r = 5, .theta = 1.0};
  bool pass = true;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto full = variance_bootstrap(data, model, cfg, MasterSeed{seed});
    auto sub = subsampled_variance_bootstrap(data, model, cfg, MasterSeed{seed});
    pass = pass && full.sigma2 == sub.sigma2 && full.within_group_v == sub.within_group_v &&
           full.group_means == sub.group_means && full.grand_mean == sub.grand_mean &&
           full.budget_used == sub.budget_used;
  }
  report(6, pass, "theta=1 subsampling is bit-identical to the full bootstrap over 20 seeds",
         timer.seconds());
}

void criterion_7_hand_values() {
  Timer timer;
  std::vector<double> two{0.0, 2.0};
  double bmw = between_minus_within(two, 4.0, 4);
  std::vector<std::vector<double>> groups{{0.0, 2.0}, {10.0, 10.0}};
  double v = within_group_variance(groups);
  bool pass = bmw == 1.0 && v == 1.0;
  report(7, pass, fmt("between_minus_within([0,2],4,4) = %g (exact 1), pooled V = %g (exact 1)",
                      bmw, v),
         timer.seconds());
}

void criterion_8_mse_ordering() {
  Timer timer;
  auto data = queue_data(200, 100, 314159);
  Mm1WaitModel model(20, 2.0);
  const double theta = 0.3;
  const long long budget = 1000;

  // High-budget reference for the zero-noise value of the subsampled
  // bootstrap variance on this dataset.
  EstimatorConfig ref_cfg{.outer_b = 10000, .inner_r = 1000, .theta = theta};
  double reference = subsampled_variance_bootstrap(data, model, ref_cfg, MasterSeed{8888}).sigma2;

  const int theta_n = 45;  // round(theta * n_bar), n_bar = 150
  const int r_values[3] = {theta_n / 4, theta_n, 4 * theta_n};
  const int seeds = 200;

  std::vector<std::vector<double>> sq_err(3, std::vector<double>(seeds));
  for (int c = 0; c < 3; ++c) {
    EstimatorConfig cfg{.outer_b = static_cast<int>(budget / r_values[c]),
                        .inner_r = r_values[c],
                        .theta = theta};
    for (int j = 0; j < seeds; ++j) {
      double est = subsampled_variance_bootstrap(data, model, cfg,
                                                 MasterSeed{1000 + static_cast<std::uint64_t>(j)})
                       .sigma2;
      double e = est - reference;
      sq_err[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)] = e * e;
    }
  }

  auto mse = [&](int c) { return kahan_mean(sq_err[static_cast<std::size_t>(c)]); };
  // One-sided paired t statistic that config `other` has larger MSE than the
  // allocation-rule config (index 1).
  auto t_stat = [&](int other) {
    std::vector<double> d(seeds);
    for (int j = 0; j < seeds; ++j) {
      d[static_cast<std::size_t>(j)] = sq_err[static_cast<std::size_t>(other)]
                                             [static_cast<std::size_t>(j)] -
                                       sq_err[1][static_cast<std::size_t>(j)];
    }
    double mean = kahan_mean(d);
    double se = std::sqrt(sample_variance(d) / seeds);
    return mean / se;
  };

  double t_small = t_stat(0);
  double t_large = t_stat(2);
  bool pass = t_small > 1.645 && t_large > 1.645;
  report(8, pass,
         fmt("MSE at R={%d,%d,%d}: {%.3g, %.3g, %.3g}; t(R=%d worse)=%.2f, t(R=%d worse)=%.2f "
             "(need >1.645 both)",
             r_values[0], r_values[1], r_values[2], mse(0), mse(1), mse(2), r_values[0], t_small,
             r_values[2], t_large),
         timer.seconds());
}

void criterion_9_determinism() {
  Timer timer;
  ExperimentConfig cfg = queue_experiment(600, 300);
  cfg.trials = 200;
  cfg.mode = CiMode::splitting;
  cfg.theta_rule = ThetaRule::practical;
  cfg.outer_b = 50;
  cfg.inner_r = 20;
  cfg.truth = 0.182;
  cfg.seed = MasterSeed{59000};

  cfg.workers = 1;
  auto r1 = run_coverage_experiment(cfg);
  cfg.workers = 4;
  auto r4 = run_coverage_experiment(cfg);

  auto tmp = std::filesystem::temp_directory_path();
  auto p1 = tmp / "iuq_accept_w1.csv";
  auto p4 = tmp / "iuq_accept_w4.csv";
  std::filesystem::remove(p1);
  std::filesystem::remove(p4);
  write_report_csv(r1, p1);
  write_trace_csv(r1, tmp / "iuq_accept_w1_trace.csv");
  write_report_csv(r4, p4);
  write_trace_csv(r4, tmp / "iuq_accept_w4_trace.csv");

  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
  };
  bool pass = slurp(p1) == slurp(p4) &&
              slurp(tmp / "iuq_accept_w1_trace.csv") == slurp(tmp / "iuq_accept_w4_trace.csv");
  report(9, pass, "1-worker and 4-worker runs produce byte-identical CSV output",
         timer.seconds());
}

void criterion_10_quantile() {
  Timer timer;
  double got = normal_quantile(0.975);
  double want = oracle_normal_quantile(0.975);
  bool pass = std::abs(got - 1.95996398) <= 1e-8 && std::abs(got - want) <= 1e-8;
  report(10, pass,
         fmt("normal_quantile(0.975) = %.10f vs bisection oracle %.10f (|diff| %.2g)", got, want,
             std::abs(got - want)),
         timer.seconds());
}

}  // namespace

int main() {
  std::printf("acceptance suite\n");
  criterion_1_truth();
  criterion_2_and_3_tables();
  criterion_4_nonsplit_bias();
  criterion_5_unbiasedness();
  criterion_6_theta_one_reduction();
  criterion_7_hand_values();
  criterion_8_mse_ordering();
  criterion_9_determinism();
  criterion_10_quantile();
  std::printf("%d criterion(s) failed\n", g_failures);
  return g_failures;
}
