#include "finipost/priors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "finipost/error.hpp"

namespace finipost {

namespace {

constexpr std::size_t kMaxPolyaDepth = 24;
constexpr std::size_t kMaxRejectionAttempts = 2'000'000;
constexpr std::size_t kMaxRejectionHistory = 4;

double gamma_draw(double shape, Rng& rng) {
  return std::gamma_distribution<double>(shape, 1.0)(rng);
}

double beta_draw(double a, double b, Rng& rng) {
  if (a == 1.0) return 1.0 - std::pow(rng.uniform_open(), 1.0 / b);
  const double x = gamma_draw(a, rng);
  const double y = gamma_draw(b, rng);
  if (x + y == 0.0) return rng.uniform() < a / (a + b) ? 1.0 : 0.0;
  return x / (x + y);
}

// Index drawn from cumulative sums (last entry is the total).
std::size_t pick(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<std::size_t>(it - cumulative.begin());
}

std::vector<double> cumulative_of(const AtomicMeasure& m) {
  std::vector<double> c(m.size());
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) c[i] = (s += m.atoms()[i].weight);
  return c;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error("bad-model", what);
}

void validate_truncation(const Truncation& t) {
  require(t.max_sticks >= 8, "max_sticks must be >= 8");
  require(t.residual_tol > 0 && t.residual_tol <= 1e-3, "residual_tol must be in (0, 1e-3]");
}

// --- finite Dirichlet -------------------------------------------------------

Point fd_point(const FiniteDirichletModel& m, std::size_t j) {
  return m.values.empty() ? Point::label(j) : Point::scalar(m.values[j]);
}

std::size_t fd_index(const FiniteDirichletModel& m, const Point& p) {
  if (m.values.empty()) {
    const std::size_t j = p.label_index();
    if (j >= m.alpha.size()) throw Error("space-mismatch", "label outside the alphabet");
    return j;
  }
  const double x = p.scalar();
  for (std::size_t j = 0; j < m.values.size(); ++j)
    if (m.values[j] == x) return j;
  throw Error("space-mismatch", "value outside the model support");
}

std::vector<double> fd_counts(const FiniteDirichletModel& m, const Sample& history) {
  std::vector<double> c(m.alpha.size(), 0.0);
  for (const auto& p : history.values) c[fd_index(m, p)] += 1.0;
  return c;
}

void fd_continue(const FiniteDirichletModel& m, Sample& seq, std::size_t N, Rng& rng) {
  std::vector<double> weight = m.alpha;
  const auto counts = fd_counts(m, seq);
  for (std::size_t j = 0; j < weight.size(); ++j) weight[j] += counts[j];
  double total = std::accumulate(weight.begin(), weight.end(), 0.0);
  while (seq.size() < N) {
    double u = rng.uniform() * total;
    std::size_t j = 0;
    for (; j + 1 < weight.size(); ++j) {
      if (u < weight[j]) break;
      u -= weight[j];
    }
    seq.values.push_back(fd_point(m, j));
    weight[j] += 1.0;
    total += 1.0;
  }
}

AtomicMeasure fd_posterior(const FiniteDirichletModel& m, const Space& space, const Sample& history,
                           Rng& rng) {
  const auto counts = fd_counts(m, history);
  std::vector<double> g(m.alpha.size());
  double total = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) total += (g[j] = gamma_draw(m.alpha[j] + counts[j], rng));
  if (total == 0.0) {
    // All gammas underflowed (tiny shapes): the draw concentrates on one label.
    std::vector<double> cum(g.size());
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) cum[j] = (s += m.alpha[j] + counts[j]);
    return AtomicMeasure::dirac(space, fd_point(m, pick(cum, rng)));
  }
  std::vector<Atom> atoms;
  for (std::size_t j = 0; j < g.size(); ++j) atoms.push_back({fd_point(m, j), g[j] / total});
  return AtomicMeasure::from_atoms(space, std::move(atoms));
}

// --- Dirichlet process ------------------------------------------------------

void dp_continue(const DirichletProcessModel& m, Sample& seq, std::size_t N, Rng& rng) {
  while (seq.size() < N) {
    const auto i = static_cast<double>(seq.size());
    if (rng.uniform() * (m.mass + i) < m.mass)
      seq.values.push_back(Point::scalar(m.base.sample(rng)));
    else
      seq.values.push_back(seq.values[rng.below(seq.size())]);
  }
}

// Generic truncated stick-breaking. `next_v(k)` gives V_k (k from 1);
// `location()` draws an atom position.
template <class NextV, class Location>
StickDraw stick_breaking(const Truncation& t, const Space& space, NextV next_v,
                         Location location) {
  std::vector<Atom> atoms;
  double remaining = 1.0;
  std::size_t k = 0;
  while (remaining >= t.residual_tol) {
    if (k == t.max_sticks)
      throw Error("truncation-exhausted", "stick mass " + std::to_string(remaining) +
                                              " left after max_sticks sticks");
    ++k;
    const double v = next_v(k);
    atoms.push_back({Point::scalar(location()), remaining * v});
    remaining *= 1.0 - v;
  }
  const double residual = remaining;
  atoms.push_back({Point::scalar(location()), residual});
  return {AtomicMeasure::from_atoms(space, std::move(atoms)), residual, k};
}

// --- stick-breaking ---------------------------------------------------------

// Prior weights over sticks; the final entry is the truncation remainder
// (or the last explicit stick).
std::vector<double> sb_weights(const StickBreakingModel& m, Rng& rng) {
  std::vector<double> w;
  double remaining = 1.0;
  if (!m.beta_params.empty()) {
    for (std::size_t k = 0; k + 1 < m.beta_params.size(); ++k) {
      const double v = beta_draw(m.beta_params[k].first, m.beta_params[k].second, rng);
      w.push_back(remaining * v);
      remaining *= 1.0 - v;
    }
    w.push_back(remaining);
    return w;
  }
  std::size_t k = 0;
  while (remaining >= m.truncation.residual_tol) {
    if (k == m.truncation.max_sticks)
      throw Error("truncation-exhausted", "stick-breaking truncation did not converge");
    ++k;
    const auto [a, b] = m.params_at(k);
    const double v = beta_draw(a, b, rng);
    w.push_back(remaining * v);
    remaining *= 1.0 - v;
  }
  w.push_back(remaining);
  return w;
}

AtomicMeasure sb_measure(const std::vector<double>& w, std::vector<double> locations) {
  std::vector<Atom> atoms;
  atoms.reserve(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) atoms.push_back({Point::scalar(locations[k]), w[k]});
  return AtomicMeasure::from_atoms(Space::real_line(), std::move(atoms));
}

AtomicMeasure sb_prior(const StickBreakingModel& m, Rng& rng) {
  const auto w = sb_weights(m, rng);
  std::vector<double> z(w.size());
  for (auto& x : z) x = m.base.sample(rng);
  return sb_measure(w, std::move(z));
}

// Exact conditioning for small n: draw weights and stick labels K_1..K_n
// from the prior and accept iff the tie pattern of K matches the tie pattern
// of the data. Used sticks are then located at the observed values; the
// base law is non-atomic, so distinct sticks never share a location.
AtomicMeasure sb_posterior(const StickBreakingModel& m, const Sample& history, Rng& rng) {
  const std::size_t n = history.size();
  if (n == 0) return sb_prior(m, rng);
  if (n > kMaxRejectionHistory)
    throw Error("posterior-unavailable",
                "stick-breaking posteriors are only available for histories of length <= 4");
  if (m.base.is_atomic()) {
    for (const auto& p : history.values)
      if (p.scalar() != m.base.first())
        throw Error("posterior-unavailable", "history outside an atomic base");
    return AtomicMeasure::dirac(Space::real_line(), Point::scalar(m.base.first()));
  }
  std::vector<std::size_t> stick(n);
  for (std::size_t attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
    const auto w = sb_weights(m, rng);
    std::vector<double> cum(w.size());
    std::partial_sum(w.begin(), w.end(), cum.begin());
    for (auto& s : stick) s = pick(cum, rng);
    bool match = true;
    for (std::size_t i = 0; i < n && match; ++i)
      for (std::size_t j = i + 1; j < n && match; ++j)
        match = (stick[i] == stick[j]) == (history.values[i] == history.values[j]);
    if (!match) continue;
    std::vector<double> z(w.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 0; i < n; ++i) z[stick[i]] = history.values[i].scalar();
    for (auto& x : z)
      if (std::isnan(x)) x = m.base.sample(rng);
    return sb_measure(w, std::move(z));
  }
  throw Error("posterior-unavailable", "rejection sampler exceeded its attempt budget");
}

// --- Pólya tree ---------------------------------------------------------------

// Nodes are stored heap-style: the string ε of length m with binary value v
// lives at index 2^m - 1 + v. Index 0 is the root (whole line).
std::size_t node_index(std::size_t level, std::size_t value) { return (std::size_t{1} << level) - 1 + value; }

std::string node_string(std::size_t level, std::size_t value) {
  std::string s(level, '0');
  for (std::size_t i = 0; i < level; ++i)
    if ((value >> (level - 1 - i)) & 1U) s[i] = '1';
  return s;
}

struct PolyaTables {
  std::vector<double> alpha;  // per node, root unused
};

PolyaTables polya_tables(const PolyaTreeModel& m) {
  const auto depth = static_cast<std::size_t>(m.depth);
  PolyaTables t;
  t.alpha.assign(node_index(depth + 1, 0), 0.0);
  for (std::size_t level = 1; level <= depth; ++level)
    for (std::size_t v = 0; v < (std::size_t{1} << level); ++v)
      t.alpha[node_index(level, v)] = m.alpha(node_string(level, v));
  return t;
}

std::size_t leaf_of(const PolyaTreeModel& m, double x) {
  const double leaves = std::ldexp(1.0, m.depth);
  const double u = m.quantile_base.cdf(x);
  const auto j = static_cast<std::size_t>(std::floor(u * leaves));
  return std::min(j, static_cast<std::size_t>(leaves) - 1);
}

double leaf_point(const PolyaTreeModel& m, std::size_t leaf) {
  return m.quantile_base.quantile((2.0 * static_cast<double>(leaf) + 1.0) /
                                  std::ldexp(1.0, m.depth + 1));
}

// α + counts of history points in each node.
std::vector<double> polya_updated(const PolyaTreeModel& m, const Sample& history) {
  auto a = polya_tables(m).alpha;
  const auto depth = static_cast<std::size_t>(m.depth);
  for (const auto& p : history.values) {
    const std::size_t leaf = leaf_of(m, p.scalar());
    for (std::size_t level = 1; level <= depth; ++level)
      a[node_index(level, leaf >> (depth - level))] += 1.0;
  }
  return a;
}

AtomicMeasure polya_draw(const PolyaTreeModel& m, const std::vector<double>& alpha, Rng& rng) {
  const auto depth = static_cast<std::size_t>(m.depth);
  std::vector<double> mass{1.0};
  for (std::size_t level = 0; level < depth; ++level) {
    std::vector<double> next(mass.size() * 2);
    for (std::size_t v = 0; v < mass.size(); ++v) {
      const double left = beta_draw(alpha[node_index(level + 1, 2 * v)],
                                    alpha[node_index(level + 1, 2 * v + 1)], rng);
      next[2 * v] = mass[v] * left;
      next[2 * v + 1] = mass[v] * (1.0 - left);
    }
    mass = std::move(next);
  }
  std::vector<Atom> atoms;
  for (std::size_t leaf = 0; leaf < mass.size(); ++leaf)
    if (mass[leaf] > 0) atoms.push_back({Point::scalar(leaf_point(m, leaf)), mass[leaf]});
  return AtomicMeasure::from_atoms(Space::real_line(), std::move(atoms));
}

// Predictive leaf probabilities given per-node α (already updated).
std::vector<double> polya_predictive(const PolyaTreeModel& m, const std::vector<double>& alpha) {
  const auto depth = static_cast<std::size_t>(m.depth);
  std::vector<double> mass{1.0};
  for (std::size_t level = 0; level < depth; ++level) {
    std::vector<double> next(mass.size() * 2);
    for (std::size_t v = 0; v < mass.size(); ++v) {
      const double a0 = alpha[node_index(level + 1, 2 * v)];
      const double a1 = alpha[node_index(level + 1, 2 * v + 1)];
      next[2 * v] = mass[v] * a0 / (a0 + a1);
      next[2 * v + 1] = mass[v] * a1 / (a0 + a1);
    }
    mass = std::move(next);
  }
  return mass;
}

void polya_continue(const PolyaTreeModel& m, Sample& seq, std::size_t N, Rng& rng) {
  auto alpha = polya_updated(m, seq);
  const auto depth = static_cast<std::size_t>(m.depth);
  while (seq.size() < N) {
    std::size_t v = 0;
    for (std::size_t level = 0; level < depth; ++level) {
      const double a0 = alpha[node_index(level + 1, 2 * v)];
      const double a1 = alpha[node_index(level + 1, 2 * v + 1)];
      v = 2 * v + (rng.uniform() * (a0 + a1) < a0 ? 0 : 1);
      alpha[node_index(level + 1, v)] += 1.0;
    }
    seq.values.push_back(Point::scalar(leaf_point(m, v)));
  }
}

// --- shared helpers -------------------------------------------------------------

void iid_extend(const AtomicMeasure& p, Sample& seq, std::size_t N, Rng& rng) {
  const auto cum = cumulative_of(p);
  while (seq.size() < N) seq.values.push_back(p.atoms()[pick(cum, rng)].point);
}

void check_history(const ExchangeableModel& model, const Sample& history) {
  const Space sp = model.space();
  for (const auto& p : history.values)
    if (!p.fits(sp)) throw Error("space-mismatch", "history point outside " + sp.describe());
}

double scalar_fn(const TestFunction& f, double x) { return f.fn(Point::scalar(x)); }

double checked(double v) {
  if (!std::isfinite(v)) throw Error("non-finite-integrand", "test function is not finite");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------

std::pair<double, double> StickBreakingModel::params_at(std::size_t k) const {
  if (!beta_params.empty()) return beta_params.at(k - 1);
  return {rule->a, rule->b + static_cast<double>(k) * rule->discount};
}

double PolyaTreeModel::alpha(const std::string& eps) const {
  if (auto it = params.find(eps); it != params.end()) return it->second;
  if (level_c) return *level_c * static_cast<double>(eps.size() * eps.size());
  throw Error("param-missing", "no Polya tree parameter for '" + eps + "'");
}

ExchangeableModel::ExchangeableModel(Variant model) : model_(std::move(model)) {
  std::visit(
      [](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FiniteDirichletModel>) {
          require(m.alpha.size() >= 2, "finite Dirichlet needs k >= 2");
          for (double a : m.alpha) require(std::isfinite(a) && a > 0, "alpha must be positive");
          require(m.values.empty() || m.values.size() == m.alpha.size(),
                  "values must match alpha in length");
          auto v = m.values;
          std::sort(v.begin(), v.end());
          require(std::adjacent_find(v.begin(), v.end()) == v.end(), "values must be distinct");
        } else if constexpr (std::is_same_v<T, DirichletProcessModel>) {
          require(std::isfinite(m.mass) && m.mass > 0, "mass must be positive");
          validate_truncation(m.truncation);
        } else if constexpr (std::is_same_v<T, StickBreakingModel>) {
          require(m.beta_params.empty() != !m.rule.has_value(),
                  "give exactly one of beta_params or rule");
          for (auto [a, b] : m.beta_params) require(a > 0 && b > 0, "beta params must be positive");
          if (m.rule)
            require(m.rule->a > 0 && m.rule->b + m.rule->discount > 0 && m.rule->discount >= 0,
                    "beta rule must give positive parameters");
          validate_truncation(m.truncation);
        } else if constexpr (std::is_same_v<T, PolyaTreeModel>) {
          require(m.depth >= 1 && static_cast<std::size_t>(m.depth) <= kMaxPolyaDepth,
                  "depth must be in [1, 24]");
          require(m.quantile_base.family() != BaseDistribution::Family::PointMass,
                  "Polya tree needs a continuous quantile base");
          for (std::size_t level = 1; level <= static_cast<std::size_t>(m.depth); ++level)
            for (std::size_t v = 0; v < (std::size_t{1} << level); ++v) {
              const double a = m.alpha(node_string(level, v));
              require(std::isfinite(a) && a > 0, "Polya tree parameters must be positive");
            }
        }
      },
      model_);
}

Space ExchangeableModel::space() const {
  if (const auto* fd = as<FiniteDirichletModel>())
    return fd->values.empty() ? Space::finite(fd->alpha.size()) : Space::real_line();
  return Space::real_line();
}

std::string ExchangeableModel::kind() const {
  static const char* names[] = {"finite_dirichlet", "dirichlet_process", "stick_breaking",
                                "polya_tree", "iid"};
  return names[model_.index()];
}

Sample sample_sequence(const ExchangeableModel& model, std::int64_t n, Rng& rng) {
  if (n < 0) throw Error("bad-length", "sequence length must be nonnegative");
  Sample empty{model.space(), {}};
  if (const auto* sb = model.as<StickBreakingModel>()) {
    iid_extend(sb_prior(*sb, rng), empty, static_cast<std::size_t>(n), rng);
    return empty;
  }
  if (const auto* pt = model.as<PolyaTreeModel>()) {
    iid_extend(polya_draw(*pt, polya_tables(*pt).alpha, rng), empty, static_cast<std::size_t>(n),
               rng);
    return empty;
  }
  return continue_sequence(model, empty, n, rng);
}

Sample continue_sequence(const ExchangeableModel& model, const Sample& history, std::int64_t N,
                         Rng& rng) {
  if (N < static_cast<std::int64_t>(history.size()))
    throw Error("bad-horizon", "horizon shorter than the history");
  check_history(model, history);
  Sample seq = history;
  seq.space = model.space();
  const auto target = static_cast<std::size_t>(N);
  if (target == seq.size()) return seq;
  seq.values.reserve(target);
  std::visit(
      [&](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FiniteDirichletModel>) {
          fd_continue(m, seq, target, rng);
        } else if constexpr (std::is_same_v<T, DirichletProcessModel>) {
          dp_continue(m, seq, target, rng);
        } else if constexpr (std::is_same_v<T, StickBreakingModel>) {
          iid_extend(sb_posterior(m, history, rng), seq, target, rng);
        } else if constexpr (std::is_same_v<T, PolyaTreeModel>) {
          polya_continue(m, seq, target, rng);
        } else {
          while (seq.size() < target) seq.values.push_back(Point::scalar(m.base.sample(rng)));
        }
      },
      model.get());
  return seq;
}

StickDraw dp_posterior_sticks(const DirichletProcessModel& m, const Sample& history, Rng& rng) {
  const auto n = static_cast<double>(history.size());
  const double mass = m.mass + n;
  auto location = [&]() {
    if (history.empty() || rng.uniform() * mass < m.mass) return m.base.sample(rng);
    return history.values[rng.below(history.size())].scalar();
  };
  return stick_breaking(m.truncation, Space::real_line(),
                        [&](std::size_t) { return beta_draw(1.0, mass, rng); }, location);
}

AtomicMeasure posterior_draw(const ExchangeableModel& model, const Sample& history, Rng& rng) {
  check_history(model, history);
  return std::visit(
      [&](const auto& m) -> AtomicMeasure {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FiniteDirichletModel>) {
          return fd_posterior(m, model.space(), history, rng);
        } else if constexpr (std::is_same_v<T, DirichletProcessModel>) {
          return dp_posterior_sticks(m, history, rng).measure;
        } else if constexpr (std::is_same_v<T, StickBreakingModel>) {
          return sb_posterior(m, history, rng);
        } else if constexpr (std::is_same_v<T, PolyaTreeModel>) {
          return polya_draw(m, polya_updated(m, history), rng);
        } else {
          if (!m.base.is_atomic())
            throw Error("posterior-unavailable",
                        "the directing law of an i.i.d. model is not atomic");
          return AtomicMeasure::dirac(Space::real_line(), Point::scalar(m.base.first()));
        }
      },
      model.get());
}

Estimate predictive_expectation(const ExchangeableModel& model, const Sample& history,
                                const TestFunction& f, Rng* rng, std::size_t mc_draws) {
  check_history(model, history);
  const auto n = static_cast<double>(history.size());
  double history_sum = 0.0;
  for (const auto& p : history.values) history_sum += checked(f.fn(p));

  if (const auto* fd = model.as<FiniteDirichletModel>()) {
    const auto counts = fd_counts(*fd, history);
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < fd->alpha.size(); ++j) {
      num += checked(f.fn(fd_point(*fd, j))) * (fd->alpha[j] + counts[j]);
      den += fd->alpha[j] + counts[j];
    }
    return {num / den, 0.0};
  }
  if (const auto* dp = model.as<DirichletProcessModel>()) {
    const double base = checked(dp->base.expect([&](double x) { return scalar_fn(f, x); }, f.kinks));
    return {(dp->mass * base + history_sum) / (dp->mass + n), 0.0};
  }
  if (const auto* iid = model.as<IidModel>())
    return {checked(iid->base.expect([&](double x) { return scalar_fn(f, x); }, f.kinks)), 0.0};
  if (const auto* pt = model.as<PolyaTreeModel>()) {
    const auto probs = polya_predictive(*pt, polya_updated(*pt, history));
    double s = 0.0;
    for (std::size_t leaf = 0; leaf < probs.size(); ++leaf)
      if (probs[leaf] > 0) s += probs[leaf] * checked(scalar_fn(f, leaf_point(*pt, leaf)));
    return {s, 0.0};
  }
  // Stick-breaking: average of ∫f dp over posterior draws.
  if (rng == nullptr) throw Error("rng-required", "Monte Carlo predictive needs a generator");
  if (mc_draws < 2) throw Error("bad-draws", "need at least two Monte Carlo draws");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < mc_draws; ++i) {
    const double v = integrate(posterior_draw(model, history, *rng), f.fn);
    const double d = v - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (v - mean);
  }
  const auto k = static_cast<double>(mc_draws);
  return {mean, std::sqrt(m2 / (k - 1) / k)};
}

Estimate predictive_pair_expectation(const ExchangeableModel& model, const Sample& history,
                                     const PairFunction& g, std::size_t mc_draws, Rng* rng) {
  check_history(model, history);
  const std::size_t n = history.size();
  const auto& xs = history.values;
  auto G = [&](const Point& a, const Point& b) { return checked(g(a, b)); };

  if (const auto* fd = model.as<FiniteDirichletModel>()) {
    const auto counts = fd_counts(*fd, history);
    const std::size_t k = fd->alpha.size();
    const double total = std::accumulate(fd->alpha.begin(), fd->alpha.end(), 0.0) + static_cast<double>(n);
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const double pj = (fd->alpha[j] + counts[j]) / total;
      for (std::size_t l = 0; l < k; ++l) {
        const double pl = (fd->alpha[l] + counts[l] + (l == j ? 1.0 : 0.0)) / (total + 1.0);
        s += pj * pl * G(fd_point(*fd, j), fd_point(*fd, l));
      }
    }
    return {s, 0.0};
  }

  auto on_base = [&](const BaseDistribution& base) {
    auto gs = [&](double x, double y) { return G(Point::scalar(x), Point::scalar(y)); };
    return base.expect_pair(gs);
  };

  if (const auto* iid = model.as<IidModel>()) return {on_base(iid->base), 0.0};

  if (const auto* dp = model.as<DirichletProcessModel>()) {
    const double c = dp->mass;
    const double nn = static_cast<double>(n);
    const BaseDistribution& base = dp->base;
    std::vector<double> kinks;
    for (const auto& p : xs) kinks.push_back(p.scalar());

    // ξ_{n+1} new from the base.
    const double both_new = on_base(base);
    const double same_new = base.expect([&](double x) { return G(Point::scalar(x), Point::scalar(x)); });
    const double new_then_old = base.expect(
        [&](double x) {
          double s = 0.0;
          for (const auto& p : xs) s += G(Point::scalar(x), p);
          return s;
        },
        kinks);
    const double from_new = (c * both_new + same_new + new_then_old) / (c + nn + 1.0);

    // ξ_{n+1} = ξ_i for a uniformly chosen past index i.
    double from_old = 0.0;
    if (n > 0) {
      const double old_then_new = base.expect(
          [&](double y) {
            double s = 0.0;
            for (const auto& p : xs) s += G(p, Point::scalar(y));
            return s;
          },
          kinks);
      double repeats = 0.0;
      for (const auto& a : xs) {
        repeats += G(a, a);
        for (const auto& b : xs) repeats += G(a, b);
      }
      from_old = (c * old_then_new + repeats) / (c + nn + 1.0);
    }
    return {(c * from_new + from_old) / (c + nn), 0.0};
  }

  // Monte Carlo over two-step continuations.
  if (rng == nullptr) throw Error("rng-required", "Monte Carlo pair expectation needs a generator");
  if (mc_draws < 2) throw Error("bad-draws", "need at least two Monte Carlo draws");
  double mean = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < mc_draws; ++i) {
    const Sample ext = continue_sequence(model, history, static_cast<std::int64_t>(n + 2), *rng);
    const double v = G(ext.values[n], ext.values[n + 1]);
    const double d = v - mean;
    mean += d / static_cast<double>(i + 1);
    m2 += d * (v - mean);
  }
  const auto k = static_cast<double>(mc_draws);
  return {mean, std::sqrt(m2 / (k - 1) / k)};
}

double polya_tree_marginal(const PolyaTreeModel& model, const std::string& eps) {
  if (eps.size() > static_cast<std::size_t>(model.depth))
    throw Error("param-missing", "eps is deeper than the tree");
  double p = 1.0;
  std::string prefix;
  for (char c : eps) {
    if (c != '0' && c != '1') throw Error("bad-eps", "eps must be a binary string");
    const double a0 = model.alpha(prefix + '0');
    const double a1 = model.alpha(prefix + '1');
    prefix += c;
    p *= (c == '0' ? a0 : a1) / (a0 + a1);
  }
  return p;
}

}  // namespace finipost
