#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <doctest.h>

#include "finipost/bounds.hpp"
#include "finipost/estimators.hpp"
#include "finipost/harness.hpp"
#include "support.hpp"

using namespace finipost;
using namespace support;
using nlohmann::json;

namespace {

json k2_config() {
  return json::parse(R"({
    "experiment": "bound_finite",
    "model": {"kind": "finite_dirichlet", "alpha": [1, 1]},
    "n": 0, "N_grid": [2, 8], "m_samples": 200, "replicates": 2,
    "ground": "TV", "bootstrap": 50, "master_seed": 42
  })");
}

std::string csv(const ExperimentReport& r) {
  std::ostringstream out;
  write_csv(out, r);
  return out.str();
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error(json doc) {
  return error_code([&] { parse_config(doc); });
}

}  // namespace

TEST_CASE("derive_seed is deterministic with a fixed test vector") {
  CHECK(derive_seed(0, 0, 0).key() == 0x33fe8bd4f9c57863ULL);
  CHECK(derive_seed(0, 0, 0).counter() == 0);
  CHECK(derive_seed(9, 3, 4) == derive_seed(9, 3, 4));
  CHECK(derive_seed(9, 0, 0) != derive_seed(9, 1, 0));
  CHECK(derive_seed(9, 0, 1) != derive_seed(9, 1, 0));
}

TEST_CASE("derive_seed has no collisions over a million pairs") {
  std::unordered_set<std::uint64_t> keys;
  keys.reserve(2'000'000);
  for (std::uint64_t r = 0; r < 1000; ++r)
    for (std::uint64_t s = 0; s < 1000; ++s) keys.insert(derive_seed(7, r, s).key());
  CHECK(keys.size() == 1'000'000);
  for (std::uint64_t m = 0; m < 1000; ++m) keys.insert(derive_seed(m, 0, 0).key());
  CHECK(keys.size() == 1'000'000 + 1000 - (keys.count(derive_seed(7, 0, 0).key()) ? 1 : 0));
}

TEST_CASE("config validation") {
  CHECK(config_error(json::array()) == "config-error");
  auto base = k2_config();
  CHECK_NOTHROW(parse_config(base));
  const auto cfg = parse_config(base);
  CHECK(cfg.master_seed == 42);
  CHECK(cfg.N_grid == std::vector<long>{2, 8});
  CHECK(cfg.ground == Ground::TV);

  auto bad = base;
  bad["experiment"] = "bound_everything";
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad.erase("model");
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["N_grid"] = {0, 2};
  bad["n"] = 0;
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["n"] = 2;
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["ground"] = "BL";
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["ground"] = "cosine";
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["m_samples"] = 1;
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["replicates"] = 0;
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["N_grid"] = "many";
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["model"] = {{"kind", "finite_dirichlet"}, {"alpha", {1}}};
  CHECK(config_error(bad) == "config-error");
  bad = base;
  bad["master_seed"] = "0x2a";
  CHECK(parse_config(bad).master_seed == 42);
  bad["master_seed"] = "forty-two";
  CHECK(config_error(bad) == "config-error");

  json real = {{"experiment", "bound_real"},
               {"model", {{"kind", "dirichlet_process"}, {"mass", 1}, {"base", {{"family", "gaussian"}, {"mu", 0}, {"sigma", 1}}}}},
               {"N_grid", {10}},
               {"ground", "BL"}};
  CHECK_NOTHROW(parse_config(real));
  real["ground"] = "TV";
  CHECK(config_error(real) == "config-error");
  real["ground"] = "BL";
  real["experiment"] = "bound_finite";
  CHECK(config_error(real) == "config-error");

  json mean = real;
  mean["experiment"] = "bound_mean";
  CHECK(config_error(mean) == "config-error");
  mean["f_spec"] = "cube";
  CHECK(config_error(mean) == "config-error");
  mean["f_spec"] = "indicator(0.5)";
  CHECK_NOTHROW(parse_config(mean));

  json sb = mean;
  sb["model"] = {{"kind", "stick_breaking"}, {"beta_params", {{1, 1}, {1, 1}}}};
  sb["n"] = 5;
  sb["N_grid"] = {10};
  CHECK(config_error(sb) == "config-error");

  json med = {{"experiment", "median_law"},
              {"model", {{"kind", "iid"}, {"base", {{"family", "uniform"}, {"lo", 0}, {"hi", 1}}}}},
              {"N_grid", {1}},
              {"n", 1}};
  CHECK(config_error(med) == "config-error");
  med["n"] = 0;
  med["F_grid"] = {0.5, 1.5};
  CHECK(config_error(med) == "config-error");

  json sweep = {{"experiment", "estimator_sweep"},
                {"model", {{"kind", "dirichlet_process"}, {"mass", 1}}},
                {"n", 4},
                {"N_grid", {4, 8}}};
  CHECK_NOTHROW(parse_config(sweep));
  sweep["N_grid"] = {3};
  CHECK(config_error(sweep) == "config-error");
}

TEST_CASE("reports are deterministic across runs and thread counts") {
  auto doc = k2_config();
  const auto one = csv(run_experiment(parse_config(doc)));
  CHECK(one == csv(run_experiment(parse_config(doc))));
  doc["threads"] = 4;
  CHECK(one == csv(run_experiment(parse_config(doc))));
  doc["master_seed"] = 43;
  CHECK(one != csv(run_experiment(parse_config(doc))));

  json real = {{"experiment", "bound_real"},
               {"model", {{"kind", "dirichlet_process"}, {"mass", 2}, {"base", {{"family", "uniform"}, {"lo", 0}, {"hi", 1}}}}},
               {"n", 3},
               {"N_grid", {6, 12}},
               {"m_samples", 40},
               {"replicates", 3},
               {"bootstrap", 20},
               {"ground", "BL"},
               {"master_seed", 5}};
  const auto a = csv(run_experiment(parse_config(real)));
  real["threads"] = 3;
  CHECK(a == csv(run_experiment(parse_config(real))));
}

TEST_CASE("golden report for the two-letter experiment") {
  const auto report = run_experiment(parse_config(k2_config()));
  REQUIRE(report.rows.size() == 4);
  const std::filesystem::path golden = std::filesystem::path(FINIPOST_TEST_DIR) / "golden" / "k2_seed42.csv";
  REQUIRE(std::filesystem::exists(golden));
  CHECK(csv(report) == slurp(golden));
  for (const auto& r : report.rows) {
    CHECK(r.experiment == "bound_finite");
    CHECK_FALSE(r.violated);
    CHECK(r.bound == doctest::Approx(finite_bound(2, 0, r.N)));
    CHECK(r.violated == (r.estimate > r.bound + r.slack));
  }
  CHECK_FALSE(report.any_violation());
  CHECK(report.metadata.at("version") == kVersion);
  CHECK(report.metadata.at("config").at("master_seed") == 42);
}

TEST_CASE("csv and json round trip") {
  ExperimentReport empty;
  CHECK(csv(empty) == "experiment,N,n,replicate,seed,estimate,stderr,bound,slack,violated\n");

  ExperimentReport r;
  r.rows.push_back({"bound_finite", 100, 10, 3, 0xfedcba9876543210ULL, 0.1 + 0.2, 1e-17 / 3, 0.179057, 0.01, false});
  r.rows.push_back({"estimator_sweep:variance", 8, 4, 0, 1, std::nextafter(1.0, 2.0), std::nullopt, INFINITY, 0, true});
  r.metadata = {{"version", kVersion}};
  CHECK(r.any_violation());
  const auto text = to_json(r).dump();
  const auto back = report_from_json(json::parse(text));
  REQUIRE(back.rows.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto &x = r.rows[i], &y = back.rows[i];
    CHECK(x.experiment == y.experiment);
    CHECK(x.N == y.N);
    CHECK(x.n == y.n);
    CHECK(x.replicate == y.replicate);
    CHECK(x.seed == y.seed);
    CHECK(x.estimate == y.estimate);
    CHECK(x.stderr == y.stderr);
    CHECK(x.bound == y.bound);
    CHECK(x.slack == y.slack);
    CHECK(x.violated == y.violated);
  }
  CHECK(back.metadata == r.metadata);

  const auto lines = csv(r);
  CHECK(lines.find("0.30000000000000004") != std::string::npos);
  CHECK(lines.find(",NA,inf,") != std::string::npos);
  CHECK(lines.find("18364758544493064720") != std::string::npos);
}

TEST_CASE("emit writes files and reports io errors") {
  const auto report = run_experiment(parse_config(k2_config()));
  const auto dir = std::filesystem::temp_directory_path() / "finipost_emit_test";
  std::filesystem::create_directories(dir);
  emit(report, (dir / "r.csv").string(), "csv");
  CHECK(slurp(dir / "r.csv") == csv(report));
  emit(report, (dir / "r.json").string(), "json");
  const auto back = report_from_json(json::parse(slurp(dir / "r.json")));
  CHECK(csv(back) == csv(report));
  CHECK(error_code([&] { emit(report, (dir / "missing" / "r.csv").string(), "csv"); }) == "io-error");
  CHECK(error_code([&] { emit(report, (dir / "r.txt").string(), "xml"); }) == "config-error");
  std::filesystem::remove_all(dir);
}

TEST_CASE("bootstrap wrappers match the plain estimators") {
  Rng rng(4);
  std::vector<AtomicMeasure> ps, qs;
  for (int i = 0; i < 30; ++i) {
    ps.push_back(letters(random_simplex(rng, 3)));
    qs.push_back(letters(random_simplex(rng, 3)));
  }
  const auto b = meta_w1_bootstrap(ps, qs, Ground::TV, 50, Rng(1));
  CHECK(b.value == doctest::Approx(meta_w1(ps, qs, Ground::TV)).epsilon(1e-12));
  CHECK(b.se > 0);
  CHECK(meta_w1_bootstrap(ps, ps, Ground::TV, 0, Rng(1)).value == doctest::Approx(0.0));
  CHECK(b.se == meta_w1_bootstrap(ps, qs, Ground::TV, 50, Rng(1)).se);

  std::vector<double> xs, ys;
  for (int i = 0; i < 100; ++i) xs.push_back(rng.uniform()), ys.push_back(2 * rng.uniform());
  const auto w = w1_samples_bootstrap(xs, ys, 100, Rng(2));
  CHECK(w.value == w1_scalar_samples(xs, ys));
  CHECK(w.se > 0);
}

TEST_CASE("loglog slope") {
  const std::vector<double> x{25, 100, 400, 1600};
  std::vector<double> y;
  for (double v : x) y.push_back(3 / std::sqrt(v));
  CHECK(loglog_slope(x, y) == doctest::Approx(-0.5).epsilon(1e-12));
  y = {1, 1, 1, 1};
  CHECK(loglog_slope(x, y) == doctest::Approx(0.0));
}

TEST_CASE("estimator sweep rows") {
  json doc = {{"experiment", "estimator_sweep"},
              {"model", {{"kind", "dirichlet_process"}, {"mass", 1.5}}},
              {"n", 6},
              {"N_grid", {6, 12, 24, 48}},
              {"y", 0.2},
              {"master_seed", 3}};
  const auto cfg = parse_config(doc);
  const auto report = run_experiment(cfg);
  CHECK(report.rows.size() == 16);
  CHECK_FALSE(report.any_violation());

  // Same history as the harness draws.
  Rng hr = derive_seed(3, 0, 0);
  const Sample h = sample_sequence(*cfg.model, 6, hr);
  std::vector<double> xs;
  for (const auto& p : h.values) xs.push_back(p.scalar());
  double ratio = -1;
  for (const auto& r : report.rows) {
    const EstimatorInputs in{*cfg.model, h, r.N};
    if (r.experiment == "estimator_sweep:mean") {
      const double now = r.estimate * r.N / 6.0;
      if (ratio >= 0) CHECK(std::abs(now - ratio) <= 1e-12);
      ratio = now;
      const auto e = mean_estimators(in);
      CHECK(r.estimate == std::abs(e.finitary - e.classical));
      CHECK(r.bound == doctest::Approx(10.0 * 6 / r.N));
    }
    if (r.experiment == "estimator_sweep:cdf") {
      CHECK(r.estimate <= 1.0);
      CHECK(r.estimate >= 0.0);
    }
    if (r.N == 6 && r.experiment == "estimator_sweep:variance") {
      const auto e = variance_estimators(in);
      double m = 0, v = 0;
      for (double x : xs) m += x / 6;
      for (double x : xs) v += (x - m) * (x - m) / 6;
      CHECK(r.estimate == doctest::Approx(std::abs(v - e.classical)).epsilon(1e-12));
      CHECK(std::isinf(r.bound));
    }
  }
}

TEST_CASE("mean experiment with a constant function") {
  json doc = {{"experiment", "bound_mean"},
              {"model", {{"kind", "dirichlet_process"}, {"mass", 1}, {"base", {{"family", "point_mass"}, {"at", 0}}}}},
              {"n", 0},
              {"N_grid", {10, 40}},
              {"m_samples", 100},
              {"replicates", 2},
              {"bootstrap", 20},
              {"f_spec", "identity"}};
  const auto report = run_experiment(parse_config(doc));
  REQUIRE(report.rows.size() == 4);
  for (const auto& r : report.rows) {
    CHECK(r.estimate == 0.0);
    CHECK(r.bound == 0.0);
    CHECK_FALSE(r.violated);
  }
}

TEST_CASE("median law rows") {
  json doc = {{"experiment", "median_law"},
              {"model", {{"kind", "iid"}, {"base", {{"family", "uniform"}, {"lo", 0}, {"hi", 1}}}}},
              {"N_grid", {1, 3}},
              {"replicates", 20000},
              {"F_grid", {0.1, 0.3, 0.5, 0.9}},
              {"master_seed", 11}};
  const auto report = run_experiment(parse_config(doc));
  CHECK(report.rows.size() == 2 * 4 * 3);
  CHECK_FALSE(report.any_violation());
  for (const auto& r : report.rows) {
    if (r.experiment == "median_law:cdf" && r.N == 1 && r.replicate == 1) {
      CHECK(r.bound == doctest::Approx(0.216).epsilon(1e-14));
      CHECK(std::abs(r.estimate - 0.216) <= 4 * std::sqrt(0.216 * 0.784 / 20000));
    }
    if (r.experiment == "median_law:cdf" && r.replicate == 2) CHECK(r.bound == 0.5);
    if (r.experiment == "median_law:left_tail" && r.N == 1)
      CHECK(r.bound == doctest::Approx(std::min(1.0, 3 * std::vector<double>{0.1, 0.3, 0.5, 0.9}[r.replicate])));
  }
}

TEST_CASE("median law rows with an empty empirical tail are not flagged") {
  json doc = {{"experiment", "median_law"},
              {"model", {{"kind", "iid"}, {"base", {{"family", "uniform"}, {"lo", 0}, {"hi", 1}}}}},
              {"N_grid", {25}},
              {"replicates", 2000},
              {"F_grid", {0.01, 0.99}},
              {"master_seed", 3}};
  const auto report = run_experiment(parse_config(doc));
  CHECK_FALSE(report.any_violation());
  for (const auto& r : report.rows)
    if (r.experiment == "median_law:cdf") CHECK((r.estimate == 0.0 || r.estimate == 1.0));
}
