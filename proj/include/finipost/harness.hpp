#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "finipost/priors.hpp"
#include "finipost/rng.hpp"
#include "finipost/transport.hpp"

namespace finipost {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  std::string experiment;  // bound_finite | bound_real | bound_mean | estimator_sweep | median_law
  std::optional<ExchangeableModel> model;
  long n = 0;
  std::vector<long> N_grid;
  std::size_t m_samples = 2000;
  std::size_t replicates = 1;
  Ground ground = Ground::TV;
  std::uint64_t master_seed = 0;
  std::string output;
  std::optional<std::string> f_spec;
  std::size_t bootstrap = 200;
  bool check_2m = false;  // also report the plug-in at 2m
  double y = 0.0;         // estimator_sweep CDF level
  std::size_t mc_draws = 10000;
  std::vector<double> F_grid;  // median_law probability levels
  std::vector<double> x_grid;  // median_law locations (overrides F_grid)
  std::size_t threads = 1;
  nlohmann::json raw;  // echo of the parsed document
};

/// Parses and validates; throws Error("config-error").
ExperimentConfig parse_config(const nlohmann::json& doc);

struct ReportRow {
  std::string experiment;
  long N = 0;
  long n = 0;
  std::size_t replicate = 0;
  std::uint64_t seed = 0;
  double estimate = 0.0;
  std::optional<double> stderr;
  double bound = 0.0;
  double slack = 0.0;
  bool violated = false;
};

struct ExperimentReport {
  std::vector<ReportRow> rows;
  nlohmann::json metadata;

  bool any_violation() const;
};

/// Plug-in meta-W1 with bootstrap standard error (resampling both measure
/// lists, class-level).
struct MetaW1Estimate {
  double value = 0.0;
  double se = 0.0;
};
MetaW1Estimate meta_w1_bootstrap(std::span<const AtomicMeasure> ps, std::span<const AtomicMeasure> qs,
                                 Ground ground, std::size_t resamples, Rng rng);

/// w1_scalar_samples with bootstrap standard error.
MetaW1Estimate w1_samples_bootstrap(std::span<const double> xs, std::span<const double> ys,
                                    std::size_t resamples, Rng rng);

ExperimentReport run_bound_experiment(const ExperimentConfig& cfg);
ExperimentReport run_mean_experiment(const ExperimentConfig& cfg);
ExperimentReport run_estimator_sweep(const ExperimentConfig& cfg);
ExperimentReport run_median_experiment(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

void write_csv(std::ostream& out, const ExperimentReport& report);
nlohmann::json to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const nlohmann::json& j);

/// Writes to `path` ("-" for stdout); throws Error("io-error").
void emit(const ExperimentReport& report, const std::string& path, const std::string& format);

/// Least-squares slope of log(y) against log(x).
double loglog_slope(std::span<const double> x, std::span<const double> y);

}  // namespace finipost
