#include "experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "allocation.hpp"
#include "errors.hpp"
#include "stats.hpp"

namespace iuq {

std::unique_ptr<InputSource> GeneratorSpec::make() const {
  switch (kind) {
    case Kind::exponential:
      return std::make_unique<ExponentialSource>(param);
    case Kind::uniform:
      return std::make_unique<UniformSource>();
    case Kind::constant:
      return std::make_unique<ConstantSource>(param);
  }
  throw Error::invalid_parameter("unknown generator kind");
}

std::string GeneratorSpec::to_string() const {
  switch (kind) {
    case Kind::exponential:
      return "exp:" + format_double(param);
    case Kind::uniform:
      return "uniform";
    case Kind::constant:
      return "const:" + format_double(param);
  }
  return "?";
}

GeneratorSpec GeneratorSpec::parse(std::string_view text) {
  auto colon = text.find(':');
  std::string_view head = text.substr(0, colon);
  std::string_view tail = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  auto parse_param = [&](std::string_view what) {
    if (tail.empty()) {
      throw Error::invalid_parameter("generator '" + std::string(text) + "' needs a " +
                                     std::string(what) + " parameter");
    }
    try {
      std::size_t consumed = 0;
      double v = std::stod(std::string(tail), &consumed);
      if (consumed != tail.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw Error::invalid_parameter("bad generator parameter in '" + std::string(text) + "'");
    }
  };

  GeneratorSpec spec;
  if (head == "exp" || head == "exponential") {
    spec.kind = Kind::exponential;
    spec.param = parse_param("rate");
    if (!(spec.param > 0.0)) {
      throw Error::invalid_parameter("exponential rate must be positive");
    }
  } else if (head == "uniform") {
    spec.kind = Kind::uniform;
    spec.param = 0.0;
  } else if (head == "const" || head == "constant") {
    spec.kind = Kind::constant;
    spec.param = parse_param("value");
  } else {
    throw Error::invalid_parameter("unknown generator '" + std::string(text) + "'");
  }
  return spec;
}

namespace {

std::string trim(std::string_view s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

long long to_ll(const std::string& value, const std::string& key) {
  long long v = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc{} || ptr != value.data() + value.size()) {
    throw Error::invalid_parameter("config key '" + key + "' must be an integer, got '" + value +
                                   "'");
  }
  return v;
}

double to_real(const std::string& value, const std::string& key) {
  try {
    std::size_t consumed = 0;
    double v = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw Error::invalid_parameter("config key '" + key + "' must be a real, got '" + value + "'");
  }
}

std::vector<long long> parse_size_list(const std::string& value) {
  std::vector<long long> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_ll(item, "sizes"));
  }
  if (out.empty()) {
    throw Error::invalid_parameter("sizes list is empty");
  }
  return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  ExperimentConfig cfg;
  std::map<int, GeneratorSpec> generators;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string text = trim(line);
    if (text.empty()) continue;

    auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw Error::invalid_parameter("config line " + std::to_string(line_no) +
                                     ": expected key=value, got '" + text + "'");
    }
    std::string key = trim(text.substr(0, eq));
    std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw Error::invalid_parameter("config line " + std::to_string(line_no) +
                                     ": empty key or value");
    }

    if (key.rfind("gen", 0) == 0 && key.size() > 3 &&
        key.find_first_not_of("0123456789", 3) == std::string::npos) {
      int idx = static_cast<int>(to_ll(key.substr(3), key));
      generators[idx] = GeneratorSpec::parse(value);
    } else if (key == "model") {
      cfg.model_name = value;
    } else if (key == "customers" || key == "threshold" || key == "exact" || key == "arity" ||
               key == "target" || key == "value") {
      cfg.model_params[key] = value;
    } else if (key == "sizes") {
      cfg.sizes = parse_size_list(value);
    } else if (key == "trials") {
      cfg.trials = static_cast<int>(to_ll(value, key));
    } else if (key == "mode") {
      if (value == "split") {
        cfg.mode = CiMode::splitting;
      } else if (value == "nosplit") {
        cfg.mode = CiMode::nonsplitting;
      } else {
        throw Error::invalid_parameter("mode must be 'split' or 'nosplit', got '" + value + "'");
      }
    } else if (key == "N") {
      cfg.total_budget = to_ll(value, key);
    } else if (key == "theta") {
      if (value == "theoretical") {
        cfg.theta_rule = ThetaRule::theoretical;
      } else if (value.rfind("practical", 0) == 0) {
        cfg.theta_rule = ThetaRule::practical;
        auto colon = value.find(':');
        if (colon != std::string::npos) {
          cfg.target_subsample = to_ll(value.substr(colon + 1), key);
        }
      } else if (value.rfind("fixed:", 0) == 0) {
        cfg.theta_rule = ThetaRule::fixed;
        cfg.theta_fixed = to_real(value.substr(6), key);
      } else {
        cfg.theta_rule = ThetaRule::fixed;
        cfg.theta_fixed = to_real(value, key);
      }
    } else if (key == "B") {
      cfg.outer_b = static_cast<int>(to_ll(value, key));
    } else if (key == "R") {
      cfg.inner_r = static_cast<int>(to_ll(value, key));
    } else if (key == "alpha") {
      cfg.alpha = to_real(value, key);
    } else if (key == "split_fraction") {
      cfg.split_fraction = to_real(value, key);
    } else if (key == "inner_multiplier") {
      cfg.inner_multiplier = to_real(value, key);
    } else if (key == "truth") {
      if (value != "estimate") cfg.truth = to_real(value, key);
    } else if (key == "truth_runs") {
      cfg.truth_runs = to_ll(value, key);
    } else if (key == "seed") {
      cfg.seed = MasterSeed{static_cast<std::uint64_t>(to_ll(value, key))};
    } else if (key == "workers") {
      cfg.workers = static_cast<int>(to_ll(value, key));
    } else {
      throw Error::invalid_parameter("unknown config key '" + key + "'");
    }
  }

  if (!generators.empty()) {
    int expected = 1;
    for (const auto& [idx, spec] : generators) {
      if (idx != expected) {
        throw Error::invalid_parameter("generator keys must be gen1..genM without gaps");
      }
      cfg.generators.push_back(spec);
      ++expected;
    }
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error::io_error("cannot open config file: " + path.string());
  }
  return parse(in);
}

ResolvedDesign resolve_design(const ExperimentConfig& cfg) {
  if (cfg.sizes.empty()) {
    throw Error::invalid_parameter("experiment config needs dataset sizes");
  }
  double n_bar = 0.0;
  for (long long n : cfg.sizes) n_bar += static_cast<double>(n);
  n_bar /= static_cast<double>(cfg.sizes.size());

  ResolvedDesign design;
  switch (cfg.theta_rule) {
    case ThetaRule::practical:
      design.theta = practical_ratio(cfg.sizes, cfg.target_subsample);
      break;
    case ThetaRule::theoretical:
      design.theta = theoretical_ratio(cfg.total_budget, n_bar);
      break;
    case ThetaRule::fixed:
      design.theta = cfg.theta_fixed;
      break;
  }
  if (!(design.theta > 0.0) || !(design.theta <= 1.0)) {
    throw Error::invalid_parameter("resolved subsample ratio outside (0, 1]");
  }

  const bool split = cfg.mode == CiMode::splitting;
  if (cfg.outer_b && cfg.inner_r) {
    design.outer_b = *cfg.outer_b;
    design.inner_r = *cfg.inner_r;
    long long used = static_cast<long long>(design.outer_b) * design.inner_r;
    if (used > cfg.total_budget) {
      throw Error::budget_too_small("B*R exceeds the total budget N");
    }
    design.point_reps = split ? cfg.total_budget - used : 0;
    design.leftover = split ? 0 : cfg.total_budget - used;
  } else if (!cfg.outer_b && !cfg.inner_r) {
    if (split && (!(cfg.split_fraction > 0.0) || !(cfg.split_fraction < 1.0))) {
      throw Error::invalid_parameter("split fraction must lie in (0, 1)");
    }
    long long var_budget =
        split ? static_cast<long long>(std::floor(static_cast<double>(cfg.total_budget) *
                                                  cfg.split_fraction))
              : cfg.total_budget;
    auto plan = allocate(var_budget, design.theta, n_bar, cfg.inner_multiplier);
    design.outer_b = plan.outer_b;
    design.inner_r = plan.inner_r;
    design.point_reps = split ? cfg.total_budget - var_budget : 0;
    design.leftover = plan.leftover();
  } else {
    throw Error::invalid_parameter("give both B and R, or neither");
  }

  if (split && design.point_reps < 2) {
    throw Error::budget_too_small("splitting mode leaves fewer than two point replications");
  }
  return design;
}

TruthEstimate estimate_truth(const SimulationModel& model,
                             std::span<const GeneratorSpec> generators, long long runs,
                             RngStream stream) {
  if (runs < 1) {
    throw Error::invalid_parameter("truth estimation needs at least one run");
  }
  if (generators.size() != model.arity()) {
    throw Error::invalid_input("generator count must match the model arity");
  }
  std::vector<std::unique_ptr<InputSource>> sources;
  std::vector<const InputSource*> inputs;
  for (const auto& g : generators) {
    sources.push_back(g.make());
    inputs.push_back(sources.back().get());
  }
  KahanSum sum;
  KahanSum sum_sq;
  for (long long r = 0; r < runs; ++r) {
    double y = replicate(model, inputs, stream);
    sum.add(y);
    sum_sq.add(y * y);
  }
  double n = static_cast<double>(runs);
  TruthEstimate t;
  t.value = sum.value() / n;
  t.runs = runs;
  if (runs > 1) {
    double var = (sum_sq.value() - n * t.value * t.value) / (n - 1.0);
    t.std_error = std::sqrt(std::max(var, 0.0) / n);
  }
  return t;
}

namespace {

std::string config_echo_string(const ExperimentConfig& cfg, const ResolvedDesign& design,
                               const TruthEstimate& truth) {
  std::ostringstream os;
  os << "model=" << cfg.model_name;
  for (const auto& [k, v] : cfg.model_params) os << ";" << k << "=" << v;
  os << ";gens=";
  for (std::size_t i = 0; i < cfg.generators.size(); ++i) {
    if (i) os << "|";
    os << cfg.generators[i].to_string();
  }
  os << ";sizes=";
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    if (i) os << "|";
    os << cfg.sizes[i];
  }
  os << ";mode=" << (cfg.mode == CiMode::splitting ? "split" : "nosplit");
  switch (cfg.theta_rule) {
    case ThetaRule::practical:
      os << ";theta_rule=practical:" << cfg.target_subsample;
      break;
    case ThetaRule::theoretical:
      os << ";theta_rule=theoretical";
      break;
    case ThetaRule::fixed:
      os << ";theta_rule=fixed:" << format_double(cfg.theta_fixed);
      break;
  }
  os << ";N=" << cfg.total_budget;
  os << ";alpha=" << format_double(cfg.alpha);
  os << ";trials=" << cfg.trials;
  os << ";seed=" << cfg.seed.value;
  os << ";truth_runs=" << (cfg.truth ? 0 : truth.runs);
  if (design.leftover > 0) os << ";leftover=" << design.leftover;
  return os.str();
}

}  // namespace

CoverageReport run_coverage_experiment(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) {
    throw Error::invalid_parameter("experiment needs at least one trial");
  }
  if (cfg.generators.empty()) {
    throw Error::invalid_parameter("experiment config needs generators");
  }
  if (cfg.generators.size() != cfg.sizes.size()) {
    throw Error::invalid_parameter("generator count must match the sizes list");
  }

  auto model = create_model(cfg.model_name, cfg.model_params);
  if (model->arity() != cfg.generators.size()) {
    throw Error::invalid_input("model arity does not match the generator count");
  }

  RngStream root = RngStream::from_seed(cfg.seed);

  TruthEstimate truth;
  if (cfg.truth) {
    truth.value = *cfg.truth;
  } else {
    truth = estimate_truth(*model, cfg.generators, cfg.truth_runs, root.derive("truth"));
  }

  ResolvedDesign design = resolve_design(cfg);
  EstimatorConfig est_cfg;
  est_cfg.outer_b = design.outer_b;
  est_cfg.inner_r = design.inner_r;
  est_cfg.theta = design.theta;

  std::vector<TrialRecord> records(static_cast<std::size_t>(cfg.trials));

  auto run_trial = [&](int t) {
    RngStream trial = root.derive("trial", static_cast<std::uint64_t>(t));

    InputCollection data;
    for (std::size_t i = 0; i < cfg.generators.size(); ++i) {
      auto source = cfg.generators[i].make();
      RngStream ds = trial.derive("data", static_cast<std::uint64_t>(i + 1));
      std::vector<double> values(static_cast<std::size_t>(cfg.sizes[i]));
      for (auto& v : values) v = source->draw(ds);
      data.add(Dataset::from_values(std::move(values)));
    }

    RngStream sim = trial.derive("sim");
    CiResult ci = cfg.mode == CiMode::splitting
                      ? ci_splitting(data, *model, est_cfg, design.point_reps, cfg.alpha, sim)
                      : ci_nonsplitting(data, *model, est_cfg, cfg.alpha, sim);

    TrialRecord rec;
    rec.trial = t;
    rec.center = ci.interval.center;
    rec.halfwidth = ci.interval.halfwidth;
    rec.sigma2_signed = ci.variance.sigma2;
    rec.sigma_i2_used = ci.interval.sigma_i2_used;
    rec.sigma_s2 = ci.interval.sigma_s2_used;
    rec.covered = ci.interval.contains(truth.value);
    rec.truncated = ci.interval.was_truncated;
    records[static_cast<std::size_t>(t - 1)] = rec;
  };

  const int workers = std::max(1, cfg.workers);
  if (workers == 1) {
    for (int t = 1; t <= cfg.trials; ++t) run_trial(t);
  } else {
    // Trials are independent; any scheduling gives the same records because
    // every trial derives its randomness from its own lineage.
    std::atomic<int> next{1};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (int t = next.fetch_add(1); t <= cfg.trials; t = next.fetch_add(1)) {
        try {
          run_trial(t);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  // Aggregate in trial order.
  CoverageReport report;
  report.trials = cfg.trials;
  long long covered = 0;
  std::vector<double> lengths(records.size());
  std::vector<double> centers(records.size());
  KahanSum ratio_sum;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    covered += rec.covered ? 1 : 0;
    lengths[i] = 2.0 * rec.halfwidth;
    centers[i] = rec.center;
    if (rec.sigma2_signed < 0.0) ++report.neg_var_count;
    if (rec.sigma_s2 > 0.0) {
      ratio_sum.add(std::sqrt(rec.sigma_i2_used / rec.sigma_s2));
    }
  }
  report.coverage = static_cast<double>(covered) / static_cast<double>(cfg.trials);
  report.mean_length = kahan_mean(lengths);
  report.std_length = records.size() > 1 ? std::sqrt(sample_variance(lengths)) : 0.0;
  report.sigma_ratio = ratio_sum.value() / static_cast<double>(cfg.trials);
  report.bias = kahan_mean(centers) - truth.value;
  report.truth = truth.value;
  report.truth_se = truth.std_error;
  report.theta = design.theta;
  report.outer_b = design.outer_b;
  report.inner_r = design.inner_r;
  report.point_reps = design.point_reps;
  report.mode = cfg.mode == CiMode::splitting ? "split" : "nosplit";
  report.config_echo = config_echo_string(cfg, design, truth);
  report.trial_log = std::move(records);
  return report;
}

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf, ptr);
}

std::string report_csv_header() {
  return "coverage,mean_length,std_length,sigma_ratio,neg_var_count,bias,trials,truth,"
         "truth_se,theta,B,R,point_reps,mode,config";
}

std::string report_csv_row(const CoverageReport& r) {
  std::ostringstream os;
  os << format_double(r.coverage) << ',' << format_double(r.mean_length) << ','
     << format_double(r.std_length) << ',' << format_double(r.sigma_ratio) << ','
     << r.neg_var_count << ',' << format_double(r.bias) << ',' << r.trials << ','
     << format_double(r.truth) << ',' << format_double(r.truth_se) << ','
     << format_double(r.theta) << ',' << r.outer_b << ',' << r.inner_r << ',' << r.point_reps
     << ',' << r.mode << ',' << r.config_echo;
  return os.str();
}

void write_report_csv(const CoverageReport& report, const std::filesystem::path& path) {
  bool need_header = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) {
    throw Error::io_error("cannot open report file for writing: " + path.string());
  }
  if (need_header) out << report_csv_header() << '\n';
  out << report_csv_row(report) << '\n';
  if (!out) {
    throw Error::io_error("failed writing report file: " + path.string());
  }
}

void write_trace_csv(const CoverageReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw Error::io_error("cannot open trace file for writing: " + path.string());
  }
  out << "trial,center,halfwidth,length,covered,sigma2,sigma_i2_used,sigma_s2,truncated\n";
  for (const auto& rec : report.trial_log) {
    out << rec.trial << ',' << format_double(rec.center) << ',' << format_double(rec.halfwidth)
        << ',' << format_double(2.0 * rec.halfwidth) << ',' << (rec.covered ? 1 : 0) << ','
        << format_double(rec.sigma2_signed) << ',' << format_double(rec.sigma_i2_used) << ','
        << format_double(rec.sigma_s2) << ',' << (rec.truncated ? 1 : 0) << '\n';
  }
  if (!out) {
    throw Error::io_error("failed writing trace file: " + path.string());
  }
}

std::string format_report_table(const CoverageReport& r) {
  char coverage[16];
  std::snprintf(coverage, sizeof(coverage), "%.1f%%", 100.0 * r.coverage);
  char line[512];
  std::string out;
  out += "mode     B    R    theta      coverage  mean len  std len   sI/sS   #neg  bias\n";
  std::snprintf(line, sizeof(line), "%-8s %-4d %-4d %-10.6g %-9s %-9.3f %-9.3f %-7.2f %-5lld %.4f\n",
                r.mode.c_str(), r.outer_b, r.inner_r, r.theta, coverage, r.mean_length,
                r.std_length, r.sigma_ratio, static_cast<long long>(r.neg_var_count), r.bias);
  out += line;
  return out;
}

}  // namespace iuq
