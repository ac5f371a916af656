#include "finipost/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <thread>

#include "finipost/bounds.hpp"
#include "finipost/error.hpp"
#include "finipost/estimators.hpp"
#include "finipost/json_io.hpp"

namespace finipost {

namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(guard);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  return mean_and_stderr(v).stderr * std::sqrt(static_cast<double>(v.size()));
}

const BaseDistribution* base_of(const ExchangeableModel& model) {
  if (const auto* m = model.as<DirichletProcessModel>()) return &m->base;
  if (const auto* m = model.as<StickBreakingModel>()) return &m->base;
  if (const auto* m = model.as<PolyaTreeModel>()) return &m->quantile_base;
  if (const auto* m = model.as<IidModel>()) return &m->base;
  return nullptr;
}

bool needs_rng(const ExchangeableModel& model) { return model.as<StickBreakingModel>() != nullptr; }

std::vector<Sample> histories(const ExperimentConfig& cfg) {
  std::vector<Sample> out;
  for (std::size_t r = 0; r < cfg.replicates; ++r) {
    Rng rng = derive_seed(cfg.master_seed, r, 0);
    out.push_back(sample_sequence(*cfg.model, cfg.n, rng));
  }
  return out;
}

double fvalue(const TestFunction& f, const Point& p) {
  const double v = f.fn(p);
  if (!std::isfinite(v)) throw Error("non-finite-integrand", "test function is not finite");
  return v;
}

}  // namespace

bool ExperimentReport::any_violation() const {
  return std::any_of(rows.begin(), rows.end(), [](const ReportRow& r) { return r.violated; });
}

ExperimentConfig parse_config(const json& doc) {
  ExperimentConfig cfg;
  try {
    if (!doc.is_object()) throw Error("config-error", "config must be a JSON object");
    cfg.raw = doc;
    cfg.experiment = doc.at("experiment").get<std::string>();
    static const std::vector<std::string> known = {"bound_finite", "bound_real", "bound_mean", "estimator_sweep",
                                                   "median_law"};
    if (std::find(known.begin(), known.end(), cfg.experiment) == known.end())
      throw Error("config-error", "unknown experiment '" + cfg.experiment + "'");
    cfg.model = model_from_json(doc.at("model"));
    cfg.n = doc.value("n", 0L);
    cfg.N_grid = doc.at("N_grid").get<std::vector<long>>();
    cfg.m_samples = doc.value("m_samples", cfg.m_samples);
    cfg.replicates = doc.value("replicates", cfg.replicates);
    if (doc.contains("ground")) cfg.ground = ground_from_string(doc.at("ground").get<std::string>());
    if (doc.contains("master_seed")) {
      const auto& s = doc.at("master_seed");
      cfg.master_seed = s.is_string() ? std::stoull(s.get<std::string>(), nullptr, 0) : s.get<std::uint64_t>();
    }
    cfg.output = doc.value("output", std::string());
    if (doc.contains("f_spec")) cfg.f_spec = doc.at("f_spec").get<std::string>();
    cfg.bootstrap = doc.value("bootstrap", cfg.bootstrap);
    cfg.check_2m = doc.value("check_2m", false);
    cfg.y = doc.value("y", 0.0);
    cfg.mc_draws = doc.value("mc_draws", cfg.mc_draws);
    if (doc.contains("F_grid")) cfg.F_grid = doc.at("F_grid").get<std::vector<double>>();
    if (doc.contains("x_grid")) cfg.x_grid = doc.at("x_grid").get<std::vector<double>>();
    cfg.threads = doc.value("threads", cfg.threads);
  } catch (const json::exception& e) {
    throw Error("config-error", e.what());
  } catch (const std::invalid_argument&) {
    throw Error("config-error", "master_seed is not a number");
  }

  const auto& model = *cfg.model;
  const bool scalar = model.space().is_scalar();
  auto fail = [](const std::string& why) { throw Error("config-error", why); };
  if (cfg.n < 0) fail("n must be >= 0");
  if (cfg.N_grid.empty()) fail("N_grid is empty");
  if (cfg.replicates < 1) fail("replicates must be >= 1");
  if (cfg.bootstrap == 1) fail("bootstrap must be 0 or >= 2");
  if (cfg.mc_draws < 2) fail("mc_draws must be >= 2");
  const bool sweep = cfg.experiment == "estimator_sweep";
  const bool median = cfg.experiment == "median_law";
  for (long N : cfg.N_grid) {
    if (median ? N < 0 : sweep ? N < cfg.n : N <= cfg.n) fail("every N in N_grid must exceed n");
    if (sweep && N < 2) fail("estimator_sweep needs N >= 2");
  }
  if (!sweep && !median && cfg.m_samples < 2) fail("m_samples must be >= 2");

  if (cfg.experiment == "bound_finite") {
    if (model.space().kind != Space::Kind::FiniteAlphabet) fail("bound_finite needs a finite-alphabet model");
    if (cfg.ground != Ground::TV) fail("bound_finite needs the TV ground metric");
  } else if (cfg.experiment == "bound_real") {
    if (!scalar) fail("bound_real needs a real-line model");
    if (cfg.ground != Ground::BL) fail("bound_real needs the BL ground metric");
  } else {
    if (!scalar) fail(cfg.experiment + " needs a real-line model");
  }
  if (cfg.experiment == "bound_mean") {
    if (!cfg.f_spec) fail("bound_mean needs f_spec");
    test_function_from_spec(*cfg.f_spec);
  }
  if (median) {
    if (cfg.n != 0) fail("median_law runs with n = 0");
    if (cfg.x_grid.empty() && base_of(model) == nullptr) fail("median_law on this model needs x_grid");
    for (double F : cfg.F_grid)
      if (!(F >= 0 && F <= 1)) fail("F_grid values must lie in [0, 1]");
  }
  const bool posterior = cfg.experiment == "bound_finite" || cfg.experiment == "bound_real" ||
                         cfg.experiment == "bound_mean" || median;
  if (posterior && model.as<StickBreakingModel>() && cfg.n > 4)
    fail("stick-breaking posterior is unavailable for n > 4");
  return cfg;
}

MetaW1Estimate meta_w1_bootstrap(std::span<const AtomicMeasure> ps, std::span<const AtomicMeasure> qs,
                                 Ground ground, std::size_t resamples, Rng rng) {
  if (ps.size() != qs.size() || ps.empty())
    throw Error("size-mismatch", "meta_w1 needs two equal-size non-empty measure lists");
  const auto pc = classify(ps);
  const auto qc = classify(qs);
  const std::size_t m = ps.size();
  const std::size_t rows = pc.representative.size(), cols = qc.representative.size();
  CostMatrix cost(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      cost.at(i, j) = ground_distance(ps[pc.representative[i]], qs[qc.representative[j]], ground);
  std::vector<double> a(rows, 0.0), b(cols, 0.0);
  for (std::size_t c : pc.class_of) a[c] += 1.0;
  for (std::size_t c : qc.class_of) b[c] += 1.0;
  MetaW1Estimate out;
  out.value = class_w1(cost, a, b);
  if (resamples == 0) return out;
  std::vector<double> boot(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    std::fill(a.begin(), a.end(), 0.0);
    std::fill(b.begin(), b.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) a[pc.class_of[rng.below(m)]] += 1.0;
    for (std::size_t i = 0; i < m; ++i) b[qc.class_of[rng.below(m)]] += 1.0;
    boot[r] = class_w1(cost, a, b);
  }
  out.se = sd_of(boot);
  return out;
}

MetaW1Estimate w1_samples_bootstrap(std::span<const double> xs, std::span<const double> ys,
                                    std::size_t resamples, Rng rng) {
  MetaW1Estimate out;
  out.value = w1_scalar_samples(xs, ys);
  if (resamples == 0) return out;
  std::vector<double> sx(xs.begin(), xs.end()), sy(ys.begin(), ys.end());
  std::sort(sx.begin(), sx.end());
  std::sort(sy.begin(), sy.end());
  const std::size_t m = sx.size();
  std::vector<std::uint32_t> cx(m), cy(m);
  std::vector<double> boot(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    std::fill(cx.begin(), cx.end(), 0);
    std::fill(cy.begin(), cy.end(), 0);
    for (std::size_t i = 0; i < m; ++i) ++cx[rng.below(m)];
    for (std::size_t i = 0; i < m; ++i) ++cy[rng.below(m)];
    // Walk both resampled order statistics in step.
    std::size_t i = 0, j = 0;
    std::uint32_t li = cx[0], lj = cy[0];
    double s = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
      while (li == 0) li = cx[++i];
      while (lj == 0) lj = cy[++j];
      s += std::abs(sx[i] - sy[j]);
      --li;
      --lj;
    }
    boot[r] = s / static_cast<double>(m);
  }
  out.se = sd_of(boot);
  return out;
}

ExperimentReport run_bound_experiment(const ExperimentConfig& cfg) {
  const auto& model = *cfg.model;
  const bool finite = cfg.experiment == "bound_finite";
  const auto hist = histories(cfg);
  const std::size_t G = cfg.N_grid.size();
  const std::size_t per_cell = cfg.check_2m ? 2 : 1;
  std::vector<ReportRow> rows(cfg.replicates * G * per_cell);

  parallel_for(cfg.replicates * G, cfg.threads, [&](std::size_t cell) {
    const std::size_t rep = cell / G, g = cell % G;
    const long N = cfg.N_grid[g];
    const Rng base = derive_seed(cfg.master_seed, rep, 1 + g);
    const Rng post_rng = base.split(0), emp_rng = base.split(1);
    const std::size_t m_max = cfg.m_samples * per_cell;
    std::vector<AtomicMeasure> post, emp;
    post.reserve(m_max);
    emp.reserve(m_max);
    for (std::size_t i = 0; i < m_max; ++i) {
      Rng r = post_rng.split(i);
      post.push_back(posterior_draw(model, hist[rep], r));
      Rng s = emp_rng.split(i);
      emp.push_back(empirical(continue_sequence(model, hist[rep], N, s)));
    }
    for (std::size_t k = 0; k < per_cell; ++k) {
      const std::size_t m = cfg.m_samples * (k + 1);
      const std::span<const AtomicMeasure> ps(emp.data(), m), qs(post.data(), m);
      const auto est = meta_w1_bootstrap(ps, qs, cfg.ground, cfg.bootstrap, base.split(2 + k));
      ReportRow row;
      row.experiment = k == 0 ? cfg.experiment : cfg.experiment + "@2m";
      row.N = N;
      row.n = cfg.n;
      row.replicate = rep;
      row.seed = base.key();
      row.estimate = est.value;
      row.stderr = est.se;
      if (finite) {
        row.bound = finite_bound(static_cast<long>(model.space().dim), cfg.n, N);
        row.slack = 3.0 * est.se;
      } else {
        std::vector<double> l21(m);
        for (std::size_t i = 0; i < m; ++i) l21[i] = l21_functional(cdf_of(qs[i]));
        const Estimate mean_l21 = mean_and_stderr(l21);
        row.bound = real_bound(cfg.n, N, mean_l21.value);
        row.slack = 3.0 * est.se + 3.0 * mean_l21.stderr / std::sqrt(static_cast<double>(N - cfg.n));
      }
      row.violated = row.estimate > row.bound + row.slack;
      rows[cell * per_cell + k] = std::move(row);
    }
  });
  return {std::move(rows), {}};
}

ExperimentReport run_mean_experiment(const ExperimentConfig& cfg) {
  const auto& model = *cfg.model;
  const TestFunction f = test_function_from_spec(*cfg.f_spec);
  const TestFunction f2([&f](const Point& p) {
    const double v = f.fn(p);
    return v * v;
  }, f.kinks);
  const auto hist = histories(cfg);
  const std::size_t G = cfg.N_grid.size();
  std::vector<ReportRow> rows(cfg.replicates * G);

  parallel_for(cfg.replicates * G, cfg.threads, [&](std::size_t cell) {
    const std::size_t rep = cell / G, g = cell % G;
    const long N = cfg.N_grid[g];
    const Sample& h = hist[rep];
    const Rng base = derive_seed(cfg.master_seed, rep, 1 + g);
    const Rng emp_rng = base.split(0), post_rng = base.split(1);
    const std::size_t M = cfg.m_samples;
    std::vector<double> xs(M), ys(M);
    for (std::size_t i = 0; i < M; ++i) {
      Rng r = emp_rng.split(i);
      const Sample seq = continue_sequence(model, h, N, r);
      double s = 0.0;
      for (const auto& p : seq.values) s += fvalue(f, p);
      xs[i] = s / static_cast<double>(N);
      Rng q = post_rng.split(i);
      ys[i] = integrate(posterior_draw(model, h, q), f.fn);
    }
    const auto est = w1_samples_bootstrap(xs, ys, cfg.bootstrap, base.split(2));

    Rng mc = base.split(3);
    Rng* mc_ptr = needs_rng(model) ? &mc : nullptr;
    const Estimate pred_f2 = predictive_expectation(model, h, f2, mc_ptr, cfg.mc_draws);
    ReportRow row;
    row.experiment = cfg.experiment;
    row.N = N;
    row.n = cfg.n;
    row.replicate = rep;
    row.seed = base.key();
    row.estimate = est.value;
    row.stderr = est.se;
    const double gap = std::sqrt(static_cast<double>(N - cfg.n));
    double bound_se = pred_f2.value > 0 ? pred_f2.stderr / (std::sqrt(pred_f2.value) * gap) : 0.0;
    if (cfg.n == 0) {
      row.bound = mean_bound_unconditional(N, pred_f2.value);
    } else {
      const Estimate post_f = predictive_expectation(model, h, f, mc_ptr, cfg.mc_draws);
      double s = 0.0;
      for (const auto& p : h.values) s += fvalue(f, p);
      row.bound = mean_bound_conditional(cfg.n, N, s / static_cast<double>(cfg.n), post_f.value, pred_f2.value);
      bound_se += static_cast<double>(cfg.n) / static_cast<double>(N) * post_f.stderr;
    }
    row.slack = 3.0 * est.se + 3.0 * bound_se;
    row.violated = row.estimate > row.bound + row.slack;
    rows[cell] = std::move(row);
  });
  return {std::move(rows), {}};
}

ExperimentReport run_estimator_sweep(const ExperimentConfig& cfg) {
  const auto& model = *cfg.model;
  const auto hist = histories(cfg);
  const std::size_t G = cfg.N_grid.size();
  static const char* names[] = {"mean", "variance", "cdf", "gini"};
  std::vector<ReportRow> rows(cfg.replicates * G * 4);

  parallel_for(cfg.replicates * G, cfg.threads, [&](std::size_t cell) {
    const std::size_t rep = cell / G, g = cell % G;
    const long N = cfg.N_grid[g];
    const Rng base = derive_seed(cfg.master_seed, rep, 1 + g);
    const EstimatorInputs in{model, hist[rep], N};
    Rng mc = base.split(0);
    Rng* mc_ptr = needs_rng(model) || model.as<PolyaTreeModel>() ? &mc : nullptr;
    const EstimatePair pairs[] = {mean_estimators(in, mc_ptr, cfg.mc_draws),
                                  variance_estimators(in, mc_ptr, cfg.mc_draws),
                                  cdf_estimators(in, cfg.y, mc_ptr, cfg.mc_draws),
                                  gini_estimators(in, cfg.mc_draws, mc_ptr)};
    const double envelope = 10.0 * static_cast<double>(cfg.n) / static_cast<double>(N);
    for (std::size_t e = 0; e < 4; ++e) {
      ReportRow row;
      row.experiment = std::string("estimator_sweep:") + names[e];
      row.N = N;
      row.n = cfg.n;
      row.replicate = rep;
      row.seed = base.key();
      row.estimate = std::abs(pairs[e].finitary - pairs[e].classical);
      if (pairs[e].stderr > 0) row.stderr = pairs[e].stderr;
      // The n/N envelope applies to the mean and CDF rows only.
      const bool enveloped = e == 0 || e == 2;
      row.bound = enveloped ? envelope : kInf;
      row.slack = 3.0 * pairs[e].stderr;
      row.violated = enveloped && row.estimate > row.bound + row.slack;
      rows[cell * 4 + e] = std::move(row);
    }
  });
  return {std::move(rows), {}};
}

ExperimentReport run_median_experiment(const ExperimentConfig& cfg) {
  const auto& model = *cfg.model;
  const BaseDistribution* base = base_of(model);
  std::vector<double> xs = cfg.x_grid;
  if (xs.empty()) {
    std::vector<double> levels = cfg.F_grid;
    if (levels.empty())
      for (int i = 0; i <= 10; ++i) levels.push_back(i / 10.0);
    for (double F : levels) xs.push_back(base->quantile(F));
  }
  const Sample empty{model.space(), {}};
  const auto* iid = model.as<IidModel>();

  // P{ξ1 <= x} and P{ξ1 >= x} under the prior predictive.
  Rng pred_rng = derive_seed(cfg.master_seed, 0, 0);
  Rng* pred_ptr = needs_rng(model) ? &pred_rng : nullptr;
  std::vector<double> p_left(xs.size()), p_right(xs.size());
  for (std::size_t l = 0; l < xs.size(); ++l) {
    const double x = xs[l];
    p_left[l] = std::clamp(
        predictive_expectation(model, empty, TestFunction([x](const Point& p) { return p.scalar() <= x ? 1.0 : 0.0; }, {x}),
                               pred_ptr, cfg.mc_draws)
            .value,
        0.0, 1.0);
    p_right[l] = std::clamp(
        predictive_expectation(model, empty, TestFunction([x](const Point& p) { return p.scalar() >= x ? 1.0 : 0.0; }, {x}),
                               pred_ptr, cfg.mc_draws)
            .value,
        0.0, 1.0);
  }

  const std::size_t G = cfg.N_grid.size();
  std::vector<std::vector<ReportRow>> per_N(G);
  parallel_for(G, cfg.threads, [&](std::size_t g) {
    const long N = cfg.N_grid[g];
    const auto R = cfg.replicates;
    std::vector<double> medians(R);
    std::vector<double> vals;
    for (std::size_t r = 0; r < R; ++r) {
      Rng rng = derive_seed(cfg.master_seed, r, 1 + g);
      const Sample s = sample_sequence(model, 2 * N + 1, rng);
      vals.clear();
      for (const auto& p : s.values) vals.push_back(p.scalar());
      std::nth_element(vals.begin(), vals.begin() + N, vals.end());
      medians[r] = vals[static_cast<std::size_t>(N)];
    }
    std::sort(medians.begin(), medians.end());

    // Law of the median: exact for a known p, mixed over prior draws otherwise.
    std::vector<Estimate> law(xs.size());
    if (iid) {
      for (std::size_t l = 0; l < xs.size(); ++l) law[l] = {median_cdf(N, std::clamp(iid->base.cdf(xs[l]), 0.0, 1.0)), 0.0};
    } else {
      std::vector<std::vector<double>> draws(xs.size(), std::vector<double>(cfg.mc_draws));
      const Rng mix = derive_seed(cfg.master_seed, 0, 1 + G + g);
      for (std::size_t d = 0; d < cfg.mc_draws; ++d) {
        Rng r = mix.split(d);
        const AtomicMeasure p = posterior_draw(model, empty, r);
        const Cdf F = cdf_of(p);
        for (std::size_t l = 0; l < xs.size(); ++l) draws[l][d] = median_cdf(N, std::clamp(F(xs[l]), 0.0, 1.0));
      }
      for (std::size_t l = 0; l < xs.size(); ++l) law[l] = mean_and_stderr(draws[l]);
    }

    const auto Rd = static_cast<double>(R);
    const std::uint64_t seed = derive_seed(cfg.master_seed, 0, 1 + g).key();
    for (std::size_t l = 0; l < xs.size(); ++l) {
      const double x = xs[l];
      const double below = static_cast<double>(std::upper_bound(medians.begin(), medians.end(), x) - medians.begin()) / Rd;
      const double above = 1.0 - below;
      const double se_below = std::sqrt(below * (1.0 - below) / Rd);
      ReportRow row;
      row.N = N;
      row.n = 0;
      row.replicate = l;
      row.seed = seed;

      row.experiment = "median_law:cdf";
      row.estimate = below;
      row.stderr = se_below;
      row.bound = law[l].value;
      const double q = std::clamp(law[l].value, 0.0, 1.0);
      row.slack = 4.0 * std::hypot(std::sqrt(q * (1.0 - q) / Rd), law[l].stderr) + 1.0 / Rd;
      row.violated = std::abs(below - law[l].value) > row.slack;
      per_N[g].push_back(row);
      if (N < 1) continue;

      const auto tails = median_tail_bounds(N, p_left[l], p_right[l]);
      row.experiment = "median_law:left_tail";
      row.bound = tails.first;
      row.slack = 3.0 * se_below;
      row.violated = row.estimate > row.bound + row.slack;
      per_N[g].push_back(row);

      row.experiment = "median_law:right_tail";
      row.estimate = above;
      row.bound = tails.second;
      row.violated = row.estimate > row.bound + row.slack;
      per_N[g].push_back(row);
    }
  });
  ExperimentReport report;
  for (auto& v : per_N)
    for (auto& r : v) report.rows.push_back(std::move(r));
  return report;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  ExperimentReport report;
  if (cfg.experiment == "bound_finite" || cfg.experiment == "bound_real")
    report = run_bound_experiment(cfg);
  else if (cfg.experiment == "bound_mean")
    report = run_mean_experiment(cfg);
  else if (cfg.experiment == "estimator_sweep")
    report = run_estimator_sweep(cfg);
  else if (cfg.experiment == "median_law")
    report = run_median_experiment(cfg);
  else
    throw Error("config-error", "unknown experiment '" + cfg.experiment + "'");
  json config = cfg.raw;
  config["master_seed"] = cfg.master_seed;
  config.erase("threads");
  report.metadata = {{"config", config}, {"version", kVersion}};
  return report;
}

void write_csv(std::ostream& out, const ExperimentReport& report) {
  out << "experiment,N,n,replicate,seed,estimate,stderr,bound,slack,violated\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : report.rows) {
    out << r.experiment << ',' << r.N << ',' << r.n << ',' << r.replicate << ',' << r.seed << ','
        << num(r.estimate) << ',' << (r.stderr ? num(*r.stderr) : "NA") << ',' << num(r.bound) << ','
        << num(r.slack) << ',' << (r.violated ? "true" : "false") << '\n';
  }
}

json to_json(const ExperimentReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    json row = {{"experiment", r.experiment}, {"N", r.N},       {"n", r.n},
                {"replicate", r.replicate},   {"seed", r.seed}, {"estimate", r.estimate},
                {"stderr", nullptr},          {"bound", nullptr}, {"slack", r.slack},
                {"violated", r.violated}};
    if (r.stderr) row["stderr"] = *r.stderr;
    if (std::isfinite(r.bound)) row["bound"] = r.bound;
    rows.push_back(std::move(row));
  }
  return {{"metadata", report.metadata}, {"rows", std::move(rows)}};
}

ExperimentReport report_from_json(const json& j) {
  ExperimentReport report;
  report.metadata = j.value("metadata", json::object());
  for (const auto& row : j.at("rows")) {
    ReportRow r;
    r.experiment = row.at("experiment").get<std::string>();
    r.N = row.at("N").get<long>();
    r.n = row.at("n").get<long>();
    r.replicate = row.at("replicate").get<std::size_t>();
    r.seed = row.at("seed").get<std::uint64_t>();
    r.estimate = row.at("estimate").get<double>();
    if (!row.at("stderr").is_null()) r.stderr = row.at("stderr").get<double>();
    r.bound = row.at("bound").is_null() ? kInf : row.at("bound").get<double>();
    r.slack = row.at("slack").get<double>();
    r.violated = row.at("violated").get<bool>();
    report.rows.push_back(std::move(r));
  }
  return report;
}

void emit(const ExperimentReport& report, const std::string& path, const std::string& format) {
  if (format != "csv" && format != "json") throw Error("config-error", "format must be csv or json");
  auto write = [&](std::ostream& out) {
    if (format == "csv")
      write_csv(out, report);
    else
      out << to_json(report).dump(2) << '\n';
  };
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io-error", "cannot open '" + path + "' for writing");
  write(out);
  out.flush();
  if (!out) throw Error("io-error", "failed writing '" + path + "'");
}

double loglog_slope(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("size-mismatch", "need two or more points");
  double mx = 0.0, my = 0.0;
  const auto k = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw Error("bad-params", "log-log slope needs positive values");
    mx += std::log(x[i]) / k;
    my += std::log(y[i]) / k;
  }
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace finipost
