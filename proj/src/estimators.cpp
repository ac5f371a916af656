#include "finipost/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "finipost/error.hpp"

namespace finipost {

namespace {

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  const std::size_t h = v.size() / 2;
  return pairwise_sum(v.first(h)) + pairwise_sum(v.subspan(h));
}

struct Setup {
  double n, N, w_past, w_future;
};

Setup setup(const EstimatorInputs& in, long min_horizon = 1) {
  if (!in.model.space().is_scalar() || in.history.space != in.model.space())
    throw Error("space-mismatch", "estimators need scalar observations");
  const auto n = static_cast<long>(in.history.size());
  if (in.horizon < n) throw Error("bad-horizon", "horizon N must be >= n");
  if (in.horizon < min_horizon) throw Error("bad-horizon", "horizon too small for this estimator");
  const auto nd = static_cast<double>(n), Nd = static_cast<double>(in.horizon);
  return {nd, Nd, nd / Nd, (Nd - nd) / Nd};
}

double sample_average(const Sample& s, const std::function<double(double)>& f) {
  if (s.empty()) return 0.0;
  std::vector<double> v;
  v.reserve(s.size());
  for (const auto& p : s.values) v.push_back(f(p.scalar()));
  return pairwise_sum(v) / static_cast<double>(v.size());
}

Estimate predictive(const EstimatorInputs& in, const TestFunction& f, Rng* rng, std::size_t mc) {
  return predictive_expectation(in.model, in.history, f, rng, mc);
}

}  // namespace

Estimate mean_and_stderr(std::span<const double> values) {
  if (values.empty()) throw Error("bad-draws", "no values");
  const auto k = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / k;
  if (values.size() < 2) return {mean, 0.0};
  std::vector<double> sq(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) sq[i] = (values[i] - mean) * (values[i] - mean);
  return {mean, std::sqrt(pairwise_sum(sq) / (k - 1) / k)};
}

EstimatePair mean_estimators(const EstimatorInputs& in, Rng* rng, std::size_t mc_draws) {
  const Setup s = setup(in);
  const double bar = sample_average(in.history, [](double x) { return x; });
  const Estimate hat = predictive(in, TestFunction([](const Point& p) { return p.scalar(); }), rng, mc_draws);
  EstimatePair out;
  out.finitary = s.w_past * bar + s.w_future * hat.value;
  out.classical = hat.value;
  out.stderr = s.w_future * hat.stderr;
  out.components = {{"mean_bar", bar}, {"mean_hat", hat.value}};
  return out;
}

EstimatePair variance_estimators(const EstimatorInputs& in, Rng* rng, std::size_t mc_draws) {
  const Setup s = setup(in);
  const double mean_bar = sample_average(in.history, [](double x) { return x; });
  const double sq_bar = sample_average(in.history, [](double x) { return x * x; });
  const double c_bar = mean_bar * mean_bar;
  const Estimate mean_hat = predictive(in, TestFunction([](const Point& p) { return p.scalar(); }), rng, mc_draws);
  const Estimate sq_hat = predictive(
      in, TestFunction([](const Point& p) { return p.scalar() * p.scalar(); }), rng, mc_draws);
  const Estimate c_hat = predictive_pair_expectation(
      in.model, in.history, [](const Point& a, const Point& b) { return a.scalar() * b.scalar(); },
      mc_draws, rng);

  const double n = s.n, N = s.N, m = N - n;
  const double N2 = N * N;
  EstimatePair out;
  out.finitary = (n / N) * sq_bar + (m + n / N - 1.0) / N * sq_hat.value - (n * n / N2) * c_bar -
                 m * (m - 1.0) / N2 * c_hat.value - 2.0 * m * n / N2 * mean_bar * mean_hat.value;
  out.classical = sq_hat.value - c_hat.value;
  out.stderr = std::hypot((m + n / N - 1.0) / N * sq_hat.stderr, m * (m - 1.0) / N2 * c_hat.stderr,
                          2.0 * m * n / N2 * mean_bar * mean_hat.stderr);
  out.components = {{"mean_bar", mean_bar}, {"mean_hat", mean_hat.value}, {"sq_bar", sq_bar},
                    {"sq_hat", sq_hat.value},   {"c_bar", c_bar},             {"c_hat", c_hat.value}};
  return out;
}

EstimatePair cdf_estimators(const EstimatorInputs& in, double y, Rng* rng, std::size_t mc_draws) {
  const Setup s = setup(in);
  const double ecdf = sample_average(in.history, [y](double x) { return x <= y ? 1.0 : 0.0; });
  const Estimate pred = predictive(
      in, TestFunction([y](const Point& p) { return p.scalar() <= y ? 1.0 : 0.0; }, {y}), rng, mc_draws);
  EstimatePair out;
  out.finitary = std::clamp(s.w_past * ecdf + s.w_future * pred.value, 0.0, 1.0);
  out.classical = std::clamp(pred.value, 0.0, 1.0);
  out.stderr = s.w_future * pred.stderr;
  out.components = {{"ecdf", ecdf}, {"pred_cdf", pred.value}};
  return out;
}

EstimatePair gini_estimators(const EstimatorInputs& in, std::size_t mc_draws, Rng* rng) {
  const Setup s = setup(in, 2);
  const double n = s.n, N = s.N, m = N - n;
  const double gini_bar = in.history.empty() ? 0.0 : gini_md(empirical(in.history));
  const Estimate pair = predictive_pair_expectation(
      in.model, in.history, [](const Point& a, const Point& b) { return std::abs(a.scalar() - b.scalar()); },
      mc_draws, rng);
  // Σ_{j<=n} E|ξ_j - ξ_{n+1}| as one predictive expectation.
  std::vector<double> xs;
  for (const auto& p : in.history.values) xs.push_back(p.scalar());
  Estimate cross{0.0, 0.0};
  if (!xs.empty())
    cross = predictive(in,
                       TestFunction(
                           [&xs](const Point& p) {
                             double t = 0.0;
                             for (double x : xs) t += std::abs(p.scalar() - x);
                             return t;
                           },
                           xs),
                       rng, mc_draws);
  const double N2 = N * N;
  EstimatePair out;
  out.finitary = (n * n / N2) * gini_bar + (m * m - m) / N2 * pair.value + 2.0 * m / N2 * cross.value;
  out.classical = pair.value;
  out.stderr = std::hypot((m * m - m) / N2 * pair.stderr, 2.0 * m / N2 * cross.stderr);
  out.components = {{"gini_bar", gini_bar}, {"pair_abs", pair.value}, {"cross_abs", cross.value}};
  return out;
}

Estimate finitary_functional(const EstimatorInputs& in, const MeasureFunctional& t,
                             std::size_t replicas, const Rng& rng) {
  if (replicas < 2) throw Error("bad-draws", "need at least two replicas");
  if (in.horizon < static_cast<long>(in.history.size())) throw Error("bad-horizon", "horizon N must be >= n");
  std::vector<double> v(replicas);
  for (std::size_t i = 0; i < replicas; ++i) {
    Rng r = rng.split(i);
    v[i] = t(empirical(continue_sequence(in.model, in.history, in.horizon, r)));
  }
  return mean_and_stderr(v);
}

std::vector<Estimate> posterior_risk_profile(const EstimatorInputs& in, const MeasureFunctional& t,
                                             std::span<const double> actions, std::size_t replicas,
                                             const Rng& rng) {
  if (replicas < 2) throw Error("bad-draws", "need at least two replicas");
  if (in.horizon < static_cast<long>(in.history.size())) throw Error("bad-horizon", "horizon N must be >= n");
  std::vector<double> values(replicas);
  for (std::size_t i = 0; i < replicas; ++i) {
    Rng r = rng.split(i);
    values[i] = t(empirical(continue_sequence(in.model, in.history, in.horizon, r)));
  }
  std::vector<Estimate> out;
  std::vector<double> loss(replicas);
  for (double a : actions) {
    for (std::size_t i = 0; i < replicas; ++i) loss[i] = (values[i] - a) * (values[i] - a);
    out.push_back(mean_and_stderr(loss));
  }
  return out;
}

Estimate posterior_risk(const EstimatorInputs& in, const MeasureFunctional& t, double action,
                        std::size_t replicas, const Rng& rng) {
  const double a[] = {action};
  return posterior_risk_profile(in, t, a, replicas, rng).front();
}

}  // namespace finipost
