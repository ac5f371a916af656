#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "finipost/measure.hpp"
#include "finipost/priors.hpp"
#include "finipost/rng.hpp"

namespace finipost {

struct EstimatorInputs {
  const ExchangeableModel& model;
  const Sample& history;
  long horizon;  // N >= n
};

/// Finitary estimate E[t(ẽ_N) | ξ(n)], the classical one built from the
/// predictive, and the intermediate statistics:
///   mean_bar, mean_hat, sq_bar, sq_hat, c_bar, c_hat, ecdf, pred_cdf,
///   gini_bar, pair_abs, cross_abs.
struct EstimatePair {
  double finitary = 0.0;
  double classical = 0.0;
  double stderr = 0.0;  // Monte Carlo error of `finitary`, 0 when exact
  std::map<std::string, double> components;
};

using MeasureFunctional = std::function<double(const AtomicMeasure&)>;

/// Models that need Monte Carlo (stick-breaking, Pólya tree pairs) take
/// `rng` and `mc_draws`; exact paths ignore them.
EstimatePair mean_estimators(const EstimatorInputs& in, Rng* rng = nullptr,
                             std::size_t mc_draws = 10000);
EstimatePair variance_estimators(const EstimatorInputs& in, Rng* rng = nullptr,
                                 std::size_t mc_draws = 10000);
EstimatePair cdf_estimators(const EstimatorInputs& in, double y, Rng* rng = nullptr,
                            std::size_t mc_draws = 10000);
EstimatePair gini_estimators(const EstimatorInputs& in, std::size_t mc_draws = 10000,
                             Rng* rng = nullptr);

/// Mean and standard error of t(empirical(ξ(N))) over continuations of
/// the history. Replica i uses rng.split(i).
Estimate finitary_functional(const EstimatorInputs& in, const MeasureFunctional& t,
                             std::size_t replicas, const Rng& rng);

/// Monte Carlo posterior risk E[(t(ẽ_N) - a)^2 | ξ(n)] for each action a,
/// all on the same continuations.
std::vector<Estimate> posterior_risk_profile(const EstimatorInputs& in, const MeasureFunctional& t,
                                             std::span<const double> actions, std::size_t replicas,
                                             const Rng& rng);
Estimate posterior_risk(const EstimatorInputs& in, const MeasureFunctional& t, double action,
                        std::size_t replicas, const Rng& rng);

/// Mean and standard error (sample sd / sqrt(k)) of a list of values,
/// summed pairwise.
Estimate mean_and_stderr(std::span<const double> values);

}  // namespace finipost
