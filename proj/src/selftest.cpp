#include "finipost/selftest.hpp"

#include <cmath>
#include <functional>
#include <numbers>
#include <ostream>
#include <string>

#include "finipost/bounds.hpp"
#include "finipost/harness.hpp"
#include "finipost/measure.hpp"
#include "finipost/rng.hpp"
#include "finipost/transport.hpp"

namespace finipost {

namespace {

bool near(double a, double b, double tol) { return std::abs(a - b) <= tol; }

AtomicMeasure on_line(std::initializer_list<std::pair<double, double>> atoms) {
  std::vector<Atom> v;
  for (auto [x, w] : atoms) v.push_back({Point::scalar(x), w});
  return AtomicMeasure::from_atoms(Space::real_line(), std::move(v));
}

}  // namespace

int run_selftest(std::ostream& out) {
  int failures = 0;
  auto check = [&](const std::string& name, const std::function<bool()>& fn) {
    bool ok = false;
    try {
      ok = fn();
    } catch (const std::exception& e) {
      out << "  " << e.what() << '\n';
    }
    out << (ok ? "PASS " : "FAIL ") << name << '\n';
    if (!ok) ++failures;
  };

  check("seed test vector", [] { return derive_seed(0, 0, 0).key() == 0x33fe8bd4f9c57863ULL; });
  check("finite bound arithmetic", [] { return near(finite_bound(3, 10, 100), 0.179057, 1e-6); });
  check("median law polynomial", [] { return near(median_cdf(1, 0.3), 0.216, 1e-12) && median_cdf(7, 0.5) == 0.5; });
  check("w1 on the line", [] { return near(w1_real(on_line({{0, 0.5}, {1, 0.5}}), on_line({{0.5, 1}})), 0.5, 1e-15); });
  check("bounded Lipschitz cap", [] {
    const auto p = on_line({{0, 1}}), q = on_line({{3, 1}});
    const auto r = bounded_lipschitz(p, q);
    return near(r.value, 2.0, 1e-12) && verify_lipschitz_dual(p, q, r);
  });
  check("assignment with certificate", [] {
    const CostMatrix c(2, 2, {3, 1, 2, 4});
    const double w[] = {0.5, 0.5};
    const auto plan = solve_discrete_ot(c, w, w);
    return near(plan.cost, 1.5, 1e-15) && verify_plan(plan, c).ok;
  });
  check("l21 of uniform", [] {
    return near(l21_functional(Cdf::analytic(BaseDistribution::uniform(0, 1))), std::numbers::pi / 8, 1e-6);
  });
  check("gini of two points", [] { return gini_md(on_line({{0, 0.5}, {1, 0.5}})) == 0.5; });
  check("two-letter oracle experiment", [] {
    const auto cfg = parse_config({{"experiment", "bound_finite"},
                                   {"model", {{"kind", "finite_dirichlet"}, {"alpha", {1, 1}}}},
                                   {"n", 0},
                                   {"N_grid", {2}},
                                   {"m_samples", 400},
                                   {"replicates", 1},
                                   {"ground", "TV"},
                                   {"master_seed", 42},
                                   {"bootstrap", 20}});
    const auto report = run_experiment(cfg);
    const auto& row = report.rows.at(0);
    return near(row.estimate, 5.0 / 36.0, 0.05) && !row.violated;
  });
  return failures;
}

}  // namespace finipost
