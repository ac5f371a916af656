#include "finipost/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "finipost/error.hpp"
#include "quadrature.hpp"

namespace finipost {

namespace {

constexpr double kAbsTol = 1e-13;
constexpr double kRelTol = 1e-12;

double integrate_segment(const std::function<double(double)>& h, double a, double b) {
  if (!(a < b)) return 0.0;
  return detail::adaptive_gk(h, a, b, kAbsTol, kRelTol);
}

// ∫ h over (lo, hi) split at the sorted interior kinks.
double integrate_split(const std::function<double(double)>& h, double lo, double hi,
                       std::span<const double> kinks) {
  std::vector<double> cuts;
  for (double k : kinks)
    if (k > lo && k < hi) cuts.push_back(k);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double total = 0.0;
  double left = lo;
  for (double c : cuts) {
    total += integrate_segment(h, left, c);
    left = c;
  }
  return total + integrate_segment(h, left, hi);
}

}  // namespace

BaseDistribution BaseDistribution::uniform(double lo, double hi) {
  if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi))
    throw Error("bad-distribution", "uniform needs finite lo < hi");
  return {Family::Uniform, lo, hi};
}

BaseDistribution BaseDistribution::gaussian(double mu, double sigma) {
  if (!(std::isfinite(mu) && std::isfinite(sigma) && sigma > 0))
    throw Error("bad-distribution", "gaussian needs finite mu and sigma > 0");
  return {Family::Gaussian, mu, sigma};
}

BaseDistribution BaseDistribution::point_mass(double at) {
  if (!std::isfinite(at)) throw Error("bad-distribution", "point mass location must be finite");
  return {Family::PointMass, at, 0.0};
}

BaseDistribution BaseDistribution::cauchy(double location, double scale) {
  if (!(std::isfinite(location) && std::isfinite(scale) && scale > 0))
    throw Error("bad-distribution", "cauchy needs finite location and scale > 0");
  return {Family::Cauchy, location, scale};
}

std::string BaseDistribution::name() const {
  switch (family_) {
    case Family::Uniform: return "uniform";
    case Family::Gaussian: return "gaussian";
    case Family::PointMass: return "point_mass";
    case Family::Cauchy: return "cauchy";
  }
  return "unknown";
}

double BaseDistribution::cdf(double x) const {
  switch (family_) {
    case Family::Uniform:
      if (x <= p1_) return 0.0;
      if (x >= p2_) return 1.0;
      return (x - p1_) / (p2_ - p1_);
    case Family::Gaussian:
      return 0.5 * std::erfc(-(x - p1_) / (p2_ * std::numbers::sqrt2));
    case Family::PointMass:
      return x >= p1_ ? 1.0 : 0.0;
    case Family::Cauchy:
      return 0.5 + std::atan((x - p1_) / p2_) / std::numbers::pi;
  }
  return 0.0;
}

double BaseDistribution::survival(double x) const {
  switch (family_) {
    case Family::Uniform:
      if (x <= p1_) return 1.0;
      if (x >= p2_) return 0.0;
      return (p2_ - x) / (p2_ - p1_);
    case Family::Gaussian:
      return 0.5 * std::erfc((x - p1_) / (p2_ * std::numbers::sqrt2));
    case Family::PointMass:
      return x >= p1_ ? 0.0 : 1.0;
    case Family::Cauchy: {
      const double z = (x - p1_) / p2_;
      return z > 0 ? std::atan(1.0 / z) / std::numbers::pi : 0.5 - std::atan(z) / std::numbers::pi;
    }
  }
  return 0.0;
}

double BaseDistribution::quantile(double u) const {
  if (!(u >= 0.0 && u <= 1.0)) throw Error("bad-probability", "quantile level outside [0,1]");
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (family_) {
    case Family::Uniform:
      return p1_ + u * (p2_ - p1_);
    case Family::Gaussian:
      if (u == 0.0) return -inf;
      if (u == 1.0) return inf;
      return boost::math::quantile(boost::math::normal(p1_, p2_), u);
    case Family::PointMass:
      return p1_;
    case Family::Cauchy:
      if (u == 0.0) return -inf;
      if (u == 1.0) return inf;
      return p1_ + p2_ * std::tan(std::numbers::pi * (u - 0.5));
  }
  return 0.0;
}

double BaseDistribution::sample(Rng& rng) const {
  switch (family_) {
    case Family::Uniform:
      return p1_ + rng.uniform() * (p2_ - p1_);
    case Family::Gaussian:
      return std::normal_distribution<double>(p1_, p2_)(rng);
    case Family::PointMass:
      return p1_;
    case Family::Cauchy:
      return quantile(rng.uniform_open());
  }
  return 0.0;
}

std::pair<double, double> BaseDistribution::effective_support(double tail) const {
  switch (family_) {
    case Family::Uniform: return {p1_, p2_};
    case Family::PointMass: return {p1_, p1_};
    default: return {quantile(tail), quantile(1.0 - tail)};
  }
}

double BaseDistribution::expect(const std::function<double(double)>& f,
                                std::span<const double> kinks) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  switch (family_) {
    case Family::PointMass:
      return f(p1_);
    case Family::Uniform: {
      const double width = p2_ - p1_;
      return integrate_split(f, p1_, p2_, kinks) / width;
    }
    case Family::Gaussian: {
      const double mu = p1_, sigma = p2_;
      auto h = [&](double x) {
        const double z = (x - mu) / sigma;
        const double density = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2 * std::numbers::pi));
        return density == 0.0 ? 0.0 : f(x) * density;
      };
      return integrate_split(h, -inf, inf, kinks);
    }
    case Family::Cauchy: {
      const double x0 = p1_, g = p2_;
      auto h = [&](double x) {
        const double z = (x - x0) / g;
        return f(x) / (std::numbers::pi * g * (1 + z * z));
      };
      return integrate_split(h, -inf, inf, kinks);
    }
  }
  return 0.0;
}

double BaseDistribution::expect_pair(const std::function<double(double, double)>& g) const {
  if (is_atomic()) return g(p1_, p1_);
  return expect([&](double x) {
    const double diag[1] = {x};
    return expect([&](double y) { return g(x, y); }, diag);
  });
}

}  // namespace finipost
