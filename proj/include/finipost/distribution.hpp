#pragma once

#include <functional>
#include <span>
#include <string>

#include "finipost/rng.hpp"

namespace finipost {

/// A named one-dimensional law used as a prior base, a Pólya-tree quantile
/// base, or an analytic CDF.
class BaseDistribution {
 public:
  enum class Family { Uniform, Gaussian, PointMass, Cauchy };

  static BaseDistribution uniform(double lo, double hi);
  static BaseDistribution gaussian(double mu, double sigma);
  static BaseDistribution point_mass(double at);
  static BaseDistribution cauchy(double location, double scale);

  Family family() const noexcept { return family_; }
  std::string name() const;
  double first() const noexcept { return p1_; }
  double second() const noexcept { return p2_; }

  bool is_atomic() const noexcept { return family_ == Family::PointMass; }

  double cdf(double x) const;
  /// P{X > x}, accurate in the right tail.
  double survival(double x) const;
  /// Left-continuous inverse. u in [0, 1]; may return +-inf at the ends.
  double quantile(double u) const;
  double sample(Rng& rng) const;

  /// Interval outside of which the mass is below `tail` on each side.
  std::pair<double, double> effective_support(double tail) const;

  /// E f(X) by adaptive Gauss-Kronrod quadrature. `kinks` are points where
  /// f may be non-smooth or jump; the range is split there.
  double expect(const std::function<double(double)>& f,
                std::span<const double> kinks = {}) const;

  /// E g(X, Y) for X, Y independent draws of this law. The inner integral is
  /// split on the diagonal y = x.
  double expect_pair(const std::function<double(double, double)>& g) const;

  friend bool operator==(const BaseDistribution&, const BaseDistribution&) = default;

 private:
  BaseDistribution(Family family, double p1, double p2) : family_(family), p1_(p1), p2_(p2) {}

  Family family_;
  double p1_;
  double p2_;
};

}  // namespace finipost
