#include "finipost/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "finipost/error.hpp"
#include "finipost/network_simplex.hpp"

namespace finipost {

namespace {

constexpr double kFeasTol = 1e-10;
constexpr double kOptTol = 1e-9;

void check_weights(std::span<const double> w, const char* which) {
  double s = 0.0;
  for (double x : w) {
    if (!std::isfinite(x) || x < 0) throw Error("bad-marginals", std::string(which) + " has a negative or non-finite weight");
    s += x;
  }
  if (std::abs(s - 1.0) > kFeasTol) throw Error("bad-marginals", std::string(which) + " does not sum to 1");
}

bool is_uniform(std::span<const double> w) {
  const double target = 1.0 / static_cast<double>(w.size());
  return std::all_of(w.begin(), w.end(), [&](double x) { return std::abs(x - target) <= 1e-15; });
}

// Three-way comparison of measures used to group identical ones.
int compare(const AtomicMeasure& a, const AtomicMeasure& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.atoms()[i];
    const auto& y = b.atoms()[i];
    if (x.point < y.point) return -1;
    if (y.point < x.point) return 1;
    if (x.weight != y.weight) return x.weight < y.weight ? -1 : 1;
  }
  return 0;
}

TransportPlan plan_shell(const CostMatrix& cost, std::span<const double> a, std::span<const double> b) {
  TransportPlan plan;
  plan.rows = cost.rows();
  plan.cols = cost.cols();
  plan.coupling.assign(plan.rows * plan.cols, 0.0);
  plan.row_marginal.assign(a.begin(), a.end());
  plan.col_marginal.assign(b.begin(), b.end());
  return plan;
}

}  // namespace

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) throw Error("bad-cost", "entry count does not match the shape");
  for (double c : data_)
    if (!std::isfinite(c) || c < 0) throw Error("bad-cost", "costs must be finite and nonnegative");
}

Ground ground_from_string(const std::string& name) {
  if (name == "TV" || name == "tv") return Ground::TV;
  if (name == "BL" || name == "bl") return Ground::BL;
  if (name == "W1REAL" || name == "w1real" || name == "W1") return Ground::W1Real;
  throw Error("config-error", "unknown ground metric '" + name + "'");
}

std::string to_string(Ground g) {
  switch (g) {
    case Ground::TV: return "TV";
    case Ground::BL: return "BL";
    case Ground::W1Real: return "W1REAL";
  }
  return "?";
}

double w1_real(const AtomicMeasure& p, const AtomicMeasure& q) {
  if (!p.space().is_scalar() || !q.space().is_scalar())
    throw Error("space-mismatch", "w1_real needs two real-line measures");
  const auto& pa = p.atoms();
  const auto& qa = q.atoms();
  std::size_t i = 0, j = 0;
  double F = 0.0, G = 0.0, total = 0.0;
  double last = 0.0;
  bool started = false;
  while (i < pa.size() || j < qa.size()) {
    const double x = j == qa.size() || (i < pa.size() && pa[i].point.scalar() <= qa[j].point.scalar())
                         ? pa[i].point.scalar()
                         : qa[j].point.scalar();
    if (started) total += std::abs(F - G) * (x - last);
    while (i < pa.size() && pa[i].point.scalar() == x) F += pa[i++].weight;
    while (j < qa.size() && qa[j].point.scalar() == x) G += qa[j++].weight;
    last = x;
    started = true;
  }
  return total;
}

double w1_scalar_samples(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.empty())
    throw Error("size-mismatch", "w1_scalar_samples needs two equal-size non-empty samples");
  std::vector<double> a(xs.begin(), xs.end()), b(ys.begin(), ys.end());
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s / static_cast<double>(a.size());
}

double tv_finite(const AtomicMeasure& p, const AtomicMeasure& q) {
  if (p.space().kind != Space::Kind::FiniteAlphabet || !(p.space() == q.space()))
    throw Error("space-mismatch", "total variation needs two measures on the same finite alphabet");
  const auto& pa = p.atoms();
  const auto& qa = q.atoms();
  std::size_t i = 0, j = 0;
  double s = 0.0;
  while (i < pa.size() || j < qa.size()) {
    if (j == qa.size() || (i < pa.size() && pa[i].point.label_index() < qa[j].point.label_index())) {
      s += pa[i++].weight;
    } else if (i == pa.size() || qa[j].point.label_index() < pa[i].point.label_index()) {
      s += qa[j++].weight;
    } else {
      s += std::abs(pa[i++].weight - qa[j++].weight);
    }
  }
  return std::min(1.0, 0.5 * s);
}

BoundedLipschitz bounded_lipschitz(const AtomicMeasure& p, const AtomicMeasure& q) {
  if (!(p.space() == q.space())) throw Error("space-mismatch", "bounded Lipschitz distance across spaces");

  // Union support with signed mass d = p - q.
  std::vector<Point> support;
  std::vector<double> diff;
  {
    const auto& pa = p.atoms();
    const auto& qa = q.atoms();
    std::size_t i = 0, j = 0;
    while (i < pa.size() || j < qa.size()) {
      if (j == qa.size() || (i < pa.size() && pa[i].point < qa[j].point)) {
        support.push_back(pa[i].point);
        diff.push_back(pa[i++].weight);
      } else if (i == pa.size() || qa[j].point < pa[i].point) {
        support.push_back(qa[j].point);
        diff.push_back(-qa[j++].weight);
      } else {
        support.push_back(pa[i].point);
        diff.push_back(pa[i++].weight - qa[j++].weight);
      }
    }
  }
  const std::size_t s = support.size();
  const std::size_t bank = s;

  // Dual of max Σ f_i d_i s.t. |f_i| <= 1, |f_i - f_j| <= dist(x_i, x_j):
  // ship d+ to d- along the metric, or through a bank node at cost 1 per
  // unit in and out. On the line only neighbours need arcs.
  std::vector<FlowArc> arcs;
  if (p.space().is_scalar()) {
    arcs.reserve(4 * s);
    for (std::size_t i = 0; i + 1 < s; ++i) {
      const double gap = support[i + 1].scalar() - support[i].scalar();
      arcs.push_back({i, i + 1, gap});
      arcs.push_back({i + 1, i, gap});
    }
  } else {
    arcs.reserve(s * s + 2 * s);
    for (std::size_t i = 0; i < s; ++i)
      for (std::size_t j = 0; j < s; ++j)
        if (i != j) arcs.push_back({i, j, distance(support[i], support[j])});
  }
  for (std::size_t i = 0; i < s; ++i) {
    arcs.push_back({i, bank, 1.0});
    arcs.push_back({bank, i, 1.0});
  }
  std::vector<double> supply(diff);
  supply.push_back(0.0);
  const FlowSolution sol = network_simplex(s + 1, arcs, supply);

  BoundedLipschitz out;
  out.flow_value = sol.cost;
  out.dual.support = std::move(support);
  out.dual.values.resize(s);
  double value = 0.0;
  for (std::size_t i = 0; i < s; ++i) {
    const double f = std::clamp(sol.potential[bank] - sol.potential[i], -1.0, 1.0);
    out.dual.values[i] = f;
    value += f * diff[i];
  }
  out.value = value;
  return out;
}

bool verify_lipschitz_dual(const AtomicMeasure& p, const AtomicMeasure& q, const BoundedLipschitz& r) {
  const auto& sup = r.dual.support;
  const auto& f = r.dual.values;
  if (sup.size() != f.size()) return false;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (std::abs(f[i]) > 1.0 + kOptTol) return false;
    for (std::size_t j = i + 1; j < f.size(); ++j)
      if (std::abs(f[i] - f[j]) > distance(sup[i], sup[j]) + kOptTol) return false;
  }
  auto value_of = [&](const AtomicMeasure& m) {
    double s = 0.0;
    for (const auto& a : m.atoms()) {
      auto it = std::lower_bound(sup.begin(), sup.end(), a.point);
      if (it == sup.end() || !(*it == a.point)) return std::numeric_limits<double>::quiet_NaN();
      s += a.weight * f[static_cast<std::size_t>(it - sup.begin())];
    }
    return s;
  };
  const double integral = value_of(p) - value_of(q);
  return std::abs(integral - r.value) <= kOptTol && std::abs(r.value - r.flow_value) <= kOptTol;
}

std::vector<std::size_t> solve_assignment(const CostMatrix& cost, std::vector<double>* u_out,
                                          std::vector<double>* v_out) {
  const std::size_t n = cost.rows();
  if (cost.cols() != n) throw Error("bad-cost", "assignment needs a square matrix");
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 1-based rows/columns; column 0 is the virtual start.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const std::size_t i0 = match[j0];
      const double* row = &cost.entries()[(i0 - 1) * n];
      const double ui0 = u[i0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = row[j - 1] - ui0 - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<std::size_t> assignment(n);
  for (std::size_t j = 1; j <= n; ++j) assignment[match[j] - 1] = j - 1;
  if (u_out) u_out->assign(u.begin() + 1, u.end());
  if (v_out) v_out->assign(v.begin() + 1, v.end());
  return assignment;
}

TransportPlan solve_discrete_ot(const CostMatrix& cost, std::span<const double> a,
                                std::span<const double> b) {
  if (a.size() != cost.rows() || b.size() != cost.cols())
    throw Error("bad-marginals", "marginal sizes do not match the cost matrix");
  check_weights(a, "row marginal");
  check_weights(b, "column marginal");
  TransportPlan plan = plan_shell(cost, a, b);
  const std::size_t m = cost.rows(), k = cost.cols();

  if (m == k && is_uniform(a) && is_uniform(b)) {
    const auto assignment = solve_assignment(cost, &plan.row_duals, &plan.col_duals);
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      plan.coupling[i * k + assignment[i]] = a[i];
      total += cost(i, assignment[i]);
    }
    plan.cost = total / static_cast<double>(m);
    return plan;
  }

  std::vector<FlowArc> arcs;
  arcs.reserve(m * k);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) arcs.push_back({i, m + j, cost(i, j)});
  std::vector<double> supply(m + k);
  for (std::size_t i = 0; i < m; ++i) supply[i] = a[i];
  for (std::size_t j = 0; j < k; ++j) supply[m + j] = -b[j];
  const FlowSolution sol = network_simplex(m + k, arcs, supply);
  plan.coupling = sol.flow;
  plan.cost = sol.cost;
  plan.row_duals.resize(m);
  plan.col_duals.resize(k);
  for (std::size_t i = 0; i < m; ++i) plan.row_duals[i] = -sol.potential[i];
  for (std::size_t j = 0; j < k; ++j) plan.col_duals[j] = sol.potential[m + j];
  return plan;
}

PlanCheck verify_plan(const TransportPlan& plan, const CostMatrix& cost) {
  PlanCheck check;
  const std::size_t m = plan.rows, k = plan.cols;
  if (m != cost.rows() || k != cost.cols() || plan.coupling.size() != m * k ||
      plan.row_marginal.size() != m || plan.col_marginal.size() != k || plan.row_duals.size() != m ||
      plan.col_duals.size() != k) {
    check.reason = "shape";
    return check;
  }
  std::vector<double> rows(m, 0.0), cols(k, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < k; ++j) {
      const double g = plan(i, j);
      if (g < -kFeasTol) {
        check.reason = "negative";
        return check;
      }
      rows[i] += g;
      cols[j] += g;
      total += g * cost(i, j);
    }
  for (std::size_t i = 0; i < m; ++i)
    if (std::abs(rows[i] - plan.row_marginal[i]) > kFeasTol) {
      check.reason = "marginal";
      return check;
    }
  for (std::size_t j = 0; j < k; ++j)
    if (std::abs(cols[j] - plan.col_marginal[j]) > kFeasTol) {
      check.reason = "marginal";
      return check;
    }
  if (std::abs(total - plan.cost) > kFeasTol) {
    check.reason = "cost";
    return check;
  }
  double dual = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    dual += plan.row_marginal[i] * plan.row_duals[i];
    for (std::size_t j = 0; j < k; ++j)
      if (plan.row_duals[i] + plan.col_duals[j] > cost(i, j) + kOptTol) {
        check.reason = "dual";
        return check;
      }
  }
  for (std::size_t j = 0; j < k; ++j) dual += plan.col_marginal[j] * plan.col_duals[j];
  check.gap = total - dual;
  if (std::abs(check.gap) > kOptTol) {
    check.reason = "gap";
    return check;
  }
  check.ok = true;
  return check;
}

double ground_distance(const AtomicMeasure& p, const AtomicMeasure& q, Ground ground) {
  switch (ground) {
    case Ground::TV: return tv_finite(p, q);
    case Ground::BL: return bounded_lipschitz(p, q).value;
    case Ground::W1Real: return w1_real(p, q);
  }
  return 0.0;
}

MeasureClasses classify(std::span<const AtomicMeasure> measures) {
  std::vector<std::size_t> order(measures.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return compare(measures[x], measures[y]) < 0;
  });
  MeasureClasses c;
  c.class_of.assign(measures.size(), 0);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (r == 0 || compare(measures[order[r - 1]], measures[order[r]]) != 0)
      c.representative.push_back(order[r]);
    c.class_of[order[r]] = c.representative.size() - 1;
  }
  return c;
}

double class_w1(const CostMatrix& cost, std::span<const double> row_counts,
                std::span<const double> col_counts) {
  // Drop empty classes; all-singleton square problems are assignments.
  std::vector<std::size_t> ri, ci;
  for (std::size_t i = 0; i < row_counts.size(); ++i)
    if (row_counts[i] > 0) ri.push_back(i);
  for (std::size_t j = 0; j < col_counts.size(); ++j)
    if (col_counts[j] > 0) ci.push_back(j);
  const double m = std::accumulate(row_counts.begin(), row_counts.end(), 0.0);
  const double m2 = std::accumulate(col_counts.begin(), col_counts.end(), 0.0);
  if (m <= 0 || std::abs(m - m2) > 1e-9 * m) throw Error("size-mismatch", "class counts differ in total");
  CostMatrix sub(ri.size(), ci.size());
  for (std::size_t i = 0; i < ri.size(); ++i)
    for (std::size_t j = 0; j < ci.size(); ++j) sub.at(i, j) = cost(ri[i], ci[j]);
  std::vector<double> a(ri.size()), b(ci.size());
  for (std::size_t i = 0; i < ri.size(); ++i) a[i] = row_counts[ri[i]] / m;
  for (std::size_t j = 0; j < ci.size(); ++j) b[j] = col_counts[ci[j]] / m;
  if (ri.size() == ci.size() && static_cast<double>(ri.size()) == m) {
    const auto assignment = solve_assignment(sub);
    double total = 0.0;
    for (std::size_t i = 0; i < ri.size(); ++i) total += sub(i, assignment[i]);
    return total / m;
  }
  return solve_discrete_ot(sub, a, b).cost;
}

double meta_w1(std::span<const AtomicMeasure> ps, std::span<const AtomicMeasure> qs, Ground ground) {
  if (ps.size() != qs.size() || ps.empty())
    throw Error("size-mismatch", "meta_w1 needs two equal-size non-empty measure lists");
  const Space sp = ps.front().space();
  for (const auto& list : {ps, qs})
    for (const auto& m : list)
      if (!(m.space() == sp)) throw Error("space-mismatch", "measures live on different spaces");
  if (ground == Ground::TV && sp.kind != Space::Kind::FiniteAlphabet)
    throw Error("space-mismatch", "TV ground metric needs finite-alphabet measures");
  if (ground == Ground::W1Real && !sp.is_scalar())
    throw Error("space-mismatch", "w1 ground metric needs real-line measures");

  const auto pc = classify(ps);
  const auto qc = classify(qs);
  CostMatrix cost(pc.representative.size(), qc.representative.size());
  for (std::size_t i = 0; i < pc.representative.size(); ++i)
    for (std::size_t j = 0; j < qc.representative.size(); ++j)
      cost.at(i, j) = ground_distance(ps[pc.representative[i]], qs[qc.representative[j]], ground);
  std::vector<double> a(pc.representative.size(), 0.0), b(qc.representative.size(), 0.0);
  for (std::size_t c : pc.class_of) a[c] += 1.0;
  for (std::size_t c : qc.class_of) b[c] += 1.0;
  return class_w1(cost, a, b);
}

}  // namespace finipost
