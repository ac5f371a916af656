#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "finipost/estimators.hpp"
#include "support.hpp"

using namespace finipost;
using namespace support;

namespace {

ExchangeableModel valued(std::vector<double> alpha, std::vector<double> values) {
  return ExchangeableModel(FiniteDirichletModel{std::move(alpha), std::move(values)});
}

ExchangeableModel dp(double c, BaseDistribution base = BaseDistribution::gaussian(0, 1)) {
  DirichletProcessModel m;
  m.mass = c;
  m.base = base;
  return ExchangeableModel(m);
}

// Plain statistics of a finished sequence.
double s_mean(const std::vector<double>& x) {
  double s = 0;
  for (double v : x) s += v;
  return s / x.size();
}
double s_var(const std::vector<double>& x) {
  const double m = s_mean(x);
  double s = 0;
  for (double v : x) s += (v - m) * (v - m);
  return s / x.size();
}
double s_gini(const std::vector<double>& x) {
  double s = 0;
  for (double a : x)
    for (double b : x) s += std::abs(a - b);
  return s / (double(x.size()) * x.size());
}
double s_cdf(const std::vector<double>& x, double y) {
  double s = 0;
  for (double v : x) s += v <= y;
  return s / x.size();
}

// Exact E[t(ẽ_N) | history] by enumerating every urn continuation.
template <class T>
double enumerate(const std::vector<double>& alpha, const std::vector<double>& values,
                 std::vector<std::size_t> labels_so_far, long N, T t) {
  if (static_cast<long>(labels_so_far.size()) == N) {
    std::vector<double> x;
    for (auto l : labels_so_far) x.push_back(values[l]);
    return t(x);
  }
  double total_alpha = 0;
  for (double a : alpha) total_alpha += a;
  std::vector<double> counts(alpha.size(), 0.0);
  for (auto l : labels_so_far) counts[l] += 1;
  double out = 0;
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    const double p = (alpha[j] + counts[j]) / (total_alpha + labels_so_far.size());
    auto next = labels_so_far;
    next.push_back(j);
    out += p * enumerate(alpha, values, next, N, t);
  }
  return out;
}

double mean_of(const AtomicMeasure& p) {
  return integrate(p, [](const Point& x) { return x.scalar(); });
}

Sample history_of(const std::vector<double>& values, const std::vector<std::size_t>& labels) {
  Sample s{Space::real_line(), {}};
  for (auto l : labels) s.values.push_back(Point::scalar(values[l]));
  return s;
}

}  // namespace

TEST_CASE("mean estimator examples") {
  const auto m = dp(1);
  const auto h = reals({2.0});
  const auto at_n = mean_estimators({m, h, 1});
  CHECK(at_n.finitary == 2.0);
  const auto r = mean_estimators({m, h, 2});
  CHECK(r.finitary == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(r.classical == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.components.at("mean_bar") == 2.0);
  CHECK(r.components.at("mean_hat") == doctest::Approx(1.0).epsilon(1e-12));
  const auto empty = reals({});
  const auto prior = mean_estimators({dp(2, BaseDistribution::uniform(1, 3)), empty, 10});
  CHECK(prior.finitary == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(prior.classical == prior.finitary);
}

TEST_CASE("variance estimator examples") {
  const auto m = valued({1, 1}, {0, 1});
  const auto empty = reals({});
  const auto r = variance_estimators({m, empty, 2});
  const double oracle = enumerate({1, 1}, {0, 1}, {}, 2, s_var);
  CHECK(oracle == doctest::Approx(1.0 / 12).epsilon(1e-15));
  CHECK(r.finitary == doctest::Approx(oracle).epsilon(1e-12));

  const auto h = reals({1, 3, 3, 7});
  const auto full = variance_estimators({dp(1), h, 4});
  CHECK(std::abs(full.finitary - s_var({1, 3, 3, 7})) <= 1e-12);

  // Nearly degenerate: point-mass base and tiny mass.
  DirichletProcessModel tight;
  tight.mass = 1e-9;
  tight.base = BaseDistribution::point_mass(4.0);
  const auto d = variance_estimators({ExchangeableModel(tight), reals({4.0, 4.0}), 50});
  CHECK(std::abs(d.finitary) <= 1e-12);
  CHECK(std::abs(d.classical) <= 1e-12);
}

TEST_CASE("cdf estimator examples") {
  const auto h = reals({0.5, -1.0, 2.0});
  const auto r = cdf_estimators({dp(1), h, 3}, 0.7);
  CHECK(r.finitary == doctest::Approx(2.0 / 3).epsilon(1e-14));
  const auto low = cdf_estimators({dp(1, BaseDistribution::uniform(0, 1)), h, 10}, -5.0);
  CHECK(low.finitary == 0.0);
  CHECK(low.classical == 0.0);
  const auto fd = cdf_estimators({valued({1, 1}, {0, 1}), reals({0.0}), 2}, 0.5);
  CHECK(fd.finitary == doctest::Approx(5.0 / 6).epsilon(1e-14));
  CHECK(fd.classical == doctest::Approx(2.0 / 3).epsilon(1e-14));
}

TEST_CASE("gini estimator examples") {
  const auto h = reals({0, 1, 1, 5});
  const auto full = gini_estimators({dp(1), h, 4});
  CHECK(std::abs(full.finitary - s_gini({0, 1, 1, 5})) <= 1e-12);

  DirichletProcessModel tight;
  tight.mass = 1e-12;
  tight.base = BaseDistribution::point_mass(2.0);
  CHECK(std::abs(gini_estimators({ExchangeableModel(tight), reals({2, 2, 2}), 9}).finitary) <= 1e-10);

  const auto two = gini_estimators({valued({1, 1}, {0, 1}), reals({}), 2});
  CHECK(two.finitary == doctest::Approx(1.0 / 6).epsilon(1e-14));
  CHECK(two.classical == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("estimator errors") {
  const auto lab = ExchangeableModel(FiniteDirichletModel{{1, 1}, {}});
  const auto h = labels(2, {0});
  CHECK(error_code([&] { mean_estimators({lab, h, 3}); }) == "space-mismatch");
  const auto r = reals({1, 2, 3});
  CHECK(error_code([&] { mean_estimators({dp(1), r, 2}); }) == "bad-horizon");
  CHECK(error_code([&] { gini_estimators({dp(1), reals({}), 1}); }) == "bad-horizon");
  CHECK(error_code([&] {
          finitary_functional({dp(1), r, 5}, [](const AtomicMeasure&) { return 0.0; }, 1, Rng(1));
        }) == "bad-draws");
}

TEST_CASE("property: closed forms equal exhaustive enumeration") {
  // Both coefficient readings are certified here.
  Rng rng(3);
  for (int t = 0; t < 40; ++t) {
    const std::size_t k = 2 + rng.below(2);
    std::vector<double> alpha, values;
    for (std::size_t j = 0; j < k; ++j) {
      alpha.push_back(0.3 + 2 * rng.uniform());
      values.push_back(std::round(10 * rng.uniform()) - 3 + 0.1 * j);
    }
    const long N = 2 + static_cast<long>(rng.below(5));
    const long n = static_cast<long>(rng.below(static_cast<std::uint64_t>(N + 1)));
    std::vector<std::size_t> past;
    for (long i = 0; i < n; ++i) past.push_back(rng.below(k));
    const auto model = valued(alpha, values);
    const auto h = history_of(values, past);
    const EstimatorInputs in{model, h, N};
    const double y = values[0];

    CHECK(mean_estimators(in).finitary ==
          doctest::Approx(enumerate(alpha, values, past, N, s_mean)).epsilon(1e-12));
    CHECK(variance_estimators(in).finitary ==
          doctest::Approx(enumerate(alpha, values, past, N, s_var)).epsilon(1e-10));
    CHECK(cdf_estimators(in, y).finitary ==
          doctest::Approx(enumerate(alpha, values, past, N, [y](const auto& x) {
                            return s_cdf(x, y);
                          })).epsilon(1e-12));
    CHECK(gini_estimators(in).finitary ==
          doctest::Approx(enumerate(alpha, values, past, N, s_gini)).epsilon(1e-10));
  }
}

TEST_CASE("property: boundary identity at n = N") {
  Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> xs;
    Sample h{Space::real_line(), {}};
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i) {
      xs.push_back(std::round(6 * rng.uniform()) - 2);
      h.values.push_back(Point::scalar(xs.back()));
    }
    const auto m = dp(0.5 + rng.uniform());
    const EstimatorInputs in{m, h, static_cast<long>(n)};
    CHECK(std::abs(mean_estimators(in).finitary - s_mean(xs)) <= 1e-12);
    CHECK(std::abs(variance_estimators(in).finitary - s_var(xs)) <= 1e-12);
    CHECK(std::abs(cdf_estimators(in, 0.0).finitary - s_cdf(xs, 0.0)) <= 1e-12);
    if (n >= 2) CHECK(std::abs(gini_estimators(in).finitary - s_gini(xs)) <= 1e-12);
  }
}

TEST_CASE("property: finitary tends to classical at rate n/N") {
  Rng rng(6);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 2 + rng.below(10);
    Sample h{Space::real_line(), {}};
    for (std::size_t i = 0; i < n; ++i) h.values.push_back(Point::scalar(3 * rng.uniform() - 1));
    const auto m = dp(1 + 3 * rng.uniform());
    const double y = rng.uniform();
    double ratio_mean = -1;
    for (long N = n; N <= static_cast<long>(n) << 12; N *= 2) {
      const EstimatorInputs in{m, h, N};
      const auto me = mean_estimators(in);
      const auto ce = cdf_estimators(in, y);
      const double f = double(N) / n;
      const double rm = std::abs(me.finitary - me.classical) * f;
      CHECK(rm <= 10.0);
      CHECK(std::abs(ce.finitary - ce.classical) * f <= 10.0);
      // Mean ratio equals |μ̄ - μ̂| at every N.
      if (ratio_mean >= 0) CHECK(std::abs(rm - ratio_mean) <= 1e-12);
      ratio_mean = rm;
    }
  }
}

TEST_CASE("property: cdf estimator monotone and bounded") {
  const auto h = reals({-0.4, 0.1, 0.1, 2.0});
  for (const auto& m : {dp(2), valued({1, 2, 3}, {-0.4, 0.1, 2.0})}) {
    double prev_f = 0, prev_c = 0;
    for (int i = -40; i <= 40; ++i) {
      const auto r = cdf_estimators({m, h, 9}, i / 10.0);
      CHECK(r.finitary >= prev_f - 1e-15);
      CHECK(r.classical >= prev_c - 1e-15);
      CHECK(r.finitary >= 0.0);
      CHECK(r.finitary <= 1.0);
      CHECK(r.classical <= 1.0);
      prev_f = r.finitary;
      prev_c = r.classical;
    }
  }
}

TEST_CASE("property: Monte Carlo agrees with every closed form") {
  const auto m = dp(1.5);
  const auto h = reals({0.2, -0.7, 0.2, 1.1, 2.5});
  const EstimatorInputs in{m, h, 15};
  const Rng rng(77);
  const std::size_t R = 10000;
  auto agree = [&](const EstimatePair& closed, const MeasureFunctional& t, std::uint64_t s) {
    const auto mc = finitary_functional(in, t, R, rng.split(s));
    CHECK(mc.stderr > 0);
    CHECK(std::abs(mc.value - closed.finitary) <= 4 * std::hypot(mc.stderr, closed.stderr));
  };
  agree(mean_estimators(in), [](const AtomicMeasure& p) { return mean_of(p); }, 1);
  agree(variance_estimators(in),
        [](const AtomicMeasure& p) {
          const double mu = mean_of(p);
          return integrate(p, [mu](const Point& x) { return (x.scalar() - mu) * (x.scalar() - mu); });
        },
        2);
  agree(cdf_estimators(in, 0.3), [](const AtomicMeasure& p) { return cdf_of(p)(0.3); }, 3);
  agree(gini_estimators(in), [](const AtomicMeasure& p) { return gini_md(p); }, 4);

  const auto total = finitary_functional(in, [](const AtomicMeasure& p) { return p.total_mass(); },
                                         50, rng);
  CHECK(total.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(total.stderr <= 1e-12);
}

TEST_CASE("stick-breaking estimators use Monte Carlo") {
  StickBreakingModel sb;
  sb.beta_params = {{1, 1}, {1, 1}, {1, 1}};
  sb.base = BaseDistribution::uniform(0, 1);
  const ExchangeableModel m(sb);
  const auto h = reals({});
  const EstimatorInputs in{m, h, 6};
  Rng rng(8);
  const auto g = gini_estimators(in, 20000, &rng);
  CHECK(g.stderr > 0);
  const auto mc = finitary_functional(in, [](const AtomicMeasure& p) { return gini_md(p); }, 20000,
                                      Rng(9));
  CHECK(std::abs(mc.value - g.finitary) <= 4 * std::hypot(mc.stderr, g.stderr));
  CHECK(error_code([&] { gini_estimators(in); }) == "rng-required");
}

TEST_CASE("posterior risk") {
  DirichletProcessModel tight;
  tight.mass = 1e-12;
  tight.base = BaseDistribution::point_mass(3.0);
  const auto degenerate = ExchangeableModel(tight);
  const auto h3 = reals({3, 3, 3});
  const MeasureFunctional mean = [](const AtomicMeasure& p) { return mean_of(p); };
  const auto zero = posterior_risk({degenerate, h3, 12}, mean, 3.0, 100, Rng(1));
  CHECK(zero.value <= 1e-20);

  const auto m = dp(1);
  const auto h = reals({0.4, -0.3, 1.2, 0.8, 0.0});
  const EstimatorInputs in{m, h, 20};
  const double fb = mean_estimators(in).finitary;
  const double step = 0.05;
  const std::vector<double> actions{fb, fb - step, fb + step, fb + 0.3};
  const auto risks = posterior_risk_profile(in, mean, actions, 100000, Rng(12));
  const auto mc = finitary_functional(in, mean, 100000, Rng(12));
  for (std::size_t a = 1; a < actions.size(); ++a) {
    const double diff = risks[a].value - risks[0].value;
    const double h2 = (actions[a] - fb) * (actions[a] - fb);
    // With shared continuations diff = h² - 2 (a - fb)(m̂ - fb) exactly.
    CHECK(diff > 0);
    CHECK(std::abs(diff - h2) <= 2 * std::abs(actions[a] - fb) * 4 * mc.stderr + 1e-12);
  }
  const auto single = posterior_risk(in, mean, fb + step, 100000, Rng(12));
  CHECK(single.value == doctest::Approx(risks[2].value).epsilon(1e-12));
}

TEST_CASE("mean and stderr") {
  const std::vector<double> v{1, 2, 3, 4};
  const auto e = mean_and_stderr(v);
  CHECK(e.value == 2.5);
  CHECK(e.stderr == doctest::Approx(std::sqrt((2.25 + 0.25 + 0.25 + 2.25) / 3 / 4)));
  const std::vector<double> one{7};
  CHECK(mean_and_stderr(one).stderr == 0.0);
}
