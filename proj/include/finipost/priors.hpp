#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "finipost/distribution.hpp"
#include "finipost/measure.hpp"
#include "finipost/rng.hpp"

namespace finipost {

/// A point estimate with its Monte Carlo standard error (0 when exact).
struct Estimate {
  double value = 0.0;
  double stderr = 0.0;
};

/// Truncation control for stick-breaking draws.
struct Truncation {
  std::size_t max_sticks = 4096;
  double residual_tol = 1e-8;
};

/// Conjugate Dirichlet prior on the simplex over k labels. With `values`
/// set, label j is emitted as the real number values[j].
struct FiniteDirichletModel {
  std::vector<double> alpha;
  std::vector<double> values;
};

/// Dirichlet process with total mass c and base law.
struct DirichletProcessModel {
  double mass = 1.0;
  BaseDistribution base = BaseDistribution::gaussian(0.0, 1.0);
  Truncation truncation;
};

/// p = Σ p_k δ_{Z_k} with p_k = V_k Π_{j<k}(1-V_j), V_k ~ Beta(a_k, b_k).
/// Either an explicit finite list (the last stick takes the remainder) or
/// the rule a_k = a, b_k = b + k·discount for k = 1, 2, ...
struct StickBreakingModel {
  struct Rule {
    double a = 1.0;
    double b = 1.0;
    double discount = 0.0;
  };
  std::vector<std::pair<double, double>> beta_params;
  std::optional<Rule> rule;
  BaseDistribution base = BaseDistribution::gaussian(0.0, 1.0);
  Truncation truncation;

  std::pair<double, double> params_at(std::size_t k) const;  // k = 1, 2, ...
};

/// Pólya tree on dyadic quantile sets B_ε = F^{-1}([Σε_i/2^i, Σε_i/2^i + 2^-m)).
/// α_ε comes from `params` (keyed by the binary string) or, when absent,
/// from α_ε = level_c · |ε|².
struct PolyaTreeModel {
  BaseDistribution quantile_base = BaseDistribution::gaussian(0.0, 1.0);
  int depth = 8;
  std::map<std::string, double> params;
  std::optional<double> level_c;

  double alpha(const std::string& eps) const;
};

/// Degenerate prior: the directing measure is the known law `base`.
struct IidModel {
  BaseDistribution base = BaseDistribution::uniform(0.0, 1.0);
};

class ExchangeableModel {
 public:
  using Variant = std::variant<FiniteDirichletModel, DirichletProcessModel, StickBreakingModel,
                               PolyaTreeModel, IidModel>;

  // Validates the parameters; throws Error("bad-model").
  ExchangeableModel(Variant model);  // NOLINT(google-explicit-constructor)

  const Variant& get() const noexcept { return model_; }
  Space space() const;
  std::string kind() const;

  template <class T>
  const T* as() const noexcept {
    return std::get_if<T>(&model_);
  }

 private:
  Variant model_;
};

/// A real test function on points, with optional locations (for scalar
/// arguments) where it may be non-smooth. Used for base-law quadrature.
struct TestFunction {
  PointFunction fn;
  std::vector<double> kinks;

  TestFunction(PointFunction f, std::vector<double> k = {})  // NOLINT
      : fn(std::move(f)), kinks(std::move(k)) {}
};

using PairFunction = std::function<double(const Point&, const Point&)>;

Sample sample_sequence(const ExchangeableModel& model, std::int64_t n, Rng& rng);

/// Extends `history` to length N by sampling ξ_{n+1..N} given ξ(n).
Sample continue_sequence(const ExchangeableModel& model, const Sample& history, std::int64_t N,
                         Rng& rng);

/// One draw of the directing measure from its posterior given `history`.
AtomicMeasure posterior_draw(const ExchangeableModel& model, const Sample& history, Rng& rng);

/// A truncated stick-breaking draw and the stick mass left over when the
/// truncation stopped (before it was reassigned to a final atom).
struct StickDraw {
  AtomicMeasure measure;
  double residual = 0.0;
  std::size_t sticks = 0;
};

/// Posterior draw for a Dirichlet process, exposing the truncation residual.
StickDraw dp_posterior_sticks(const DirichletProcessModel& model, const Sample& history, Rng& rng);

/// E[f(ξ_{n+1}) | ξ(n)]. Exact for finite Dirichlet, Dirichlet process,
/// Pólya tree and i.i.d. models; Monte Carlo over posterior draws for
/// stick-breaking (needs `rng`).
Estimate predictive_expectation(const ExchangeableModel& model, const Sample& history,
                                const TestFunction& f, Rng* rng = nullptr,
                                std::size_t mc_draws = 10000);

/// E[g(ξ_{n+1}, ξ_{n+2}) | ξ(n)]. Exact one-step urn expansion for finite
/// Dirichlet, Dirichlet process and i.i.d. models; Monte Carlo over
/// two-step continuations otherwise.
Estimate predictive_pair_expectation(const ExchangeableModel& model, const Sample& history,
                                     const PairFunction& g, std::size_t mc_draws, Rng* rng);

/// P{ξ_n ∈ B_eps} under the prior Pólya tree.
double polya_tree_marginal(const PolyaTreeModel& model, const std::string& eps);

}  // namespace finipost
