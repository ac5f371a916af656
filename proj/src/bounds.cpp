#include "finipost/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "finipost/error.hpp"

namespace finipost {

namespace {

void need_horizon(long n, long N) {
  if (n < 0 || n >= N) throw Error("bad-horizon", "need 0 <= n < N");
}

double sqrt_gap(long n, long N) { return std::sqrt(static_cast<double>(N - n)); }

double fraction(long n, long N) { return static_cast<double>(n) / static_cast<double>(N); }

// Lentz evaluation of the continued fraction for I_x(a, b).
double beta_cf(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw Error("no-convergence", "incomplete beta continued fraction");
}

}  // namespace

double mean_bound_unconditional(long N, double Ef2) {
  if (N < 1) throw Error("bad-horizon", "need N >= 1");
  if (!(Ef2 >= 0)) throw Error("bad-params", "second moment must be >= 0");
  return 2.0 * std::sqrt(Ef2) / std::sqrt(static_cast<double>(N));
}

double mean_bound_conditional(long n, long N, double sample_mean_f, double post_mean_f,
                              double pred_f2) {
  need_horizon(n, N);
  if (!(pred_f2 >= 0)) throw Error("bad-params", "second moment must be >= 0");
  return fraction(n, N) * (std::abs(sample_mean_f) + std::abs(post_mean_f)) +
         2.0 * std::sqrt(pred_f2) / sqrt_gap(n, N);
}

double finite_bound(long k, long n, long N) {
  if (k < 2) throw Error("bad-params", "alphabet size must be >= 2");
  need_horizon(n, N);
  return static_cast<double>(k) / (4.0 * sqrt_gap(n, N)) + fraction(n, N);
}

double real_bound(long n, long N, double post_l21) {
  need_horizon(n, N);
  if (!(post_l21 >= 0)) throw Error("bad-params", "l21 value must be >= 0");
  return post_l21 / sqrt_gap(n, N) + 2.0 * fraction(n, N);
}

double bounded_support_bound(double M, long n, long N) {
  if (!(M > 0)) throw Error("bad-params", "M must be > 0");
  need_horizon(n, N);
  return 2.0 * M / sqrt_gap(n, N) + 2.0 * fraction(n, N);
}

double l21_moment_bound(double delta, double m2delta) {
  if (!(delta > 0)) throw Error("bad-delta", "delta must be > 0");
  if (!(m2delta >= 0)) throw Error("bad-params", "moment must be >= 0");
  return 1.0 + std::sqrt(2.0 * (1.0 + delta) / delta) * std::sqrt(m2delta);
}

double tail_probability_bound(double epsilon, double e_l21, long n, long N) {
  if (!(epsilon > 0)) throw Error("bad-epsilon", "epsilon must be > 0");
  return std::min(1.0, real_bound(n, N, e_l21) / epsilon);
}

double dudley_gamma(long d, long k) {
  if (d < 2 || k <= d || k <= 2) throw Error("bad-dudley-params", "need d >= 2, k > d, k > 2");
  return static_cast<double>(k * d) / static_cast<double>((k - d) * (k - 2));
}

double euclidean_bound(long d, long k, long n, long N, double gamma_moment_post,
                       std::optional<double> psi) {
  const double gamma = dudley_gamma(d, k);
  if (gamma < 1.0) throw Error("gamma-below-one", "gamma = " + std::to_string(gamma));
  need_horizon(n, N);
  if (!(gamma_moment_post >= 0)) throw Error("bad-dudley-params", "moment must be >= 0");
  const double kk = static_cast<double>(k);
  double psi_bound;
  if (psi) {
    if (!(*psi >= 0)) throw Error("bad-dudley-params", "psi must be >= 0");
    psi_bound = *psi;
  } else {
    const double Y = 2.0 * std::pow(gamma_moment_post, 1.0 / gamma);
    psi_bound = std::pow(2.0, static_cast<double>(d) / 2.0) * std::sqrt(1.0 + Y);
  }
  const double c = 4.0 / 3.0 + 4.0 * std::pow(3.0, 2.0 * kk) * psi_bound;
  return c * std::pow(static_cast<double>(N - n), -1.0 / kk) + 2.0 * fraction(n, N);
}

double lemma_bound(double mean_e, double K, long n, long N) {
  need_horizon(n, N);
  if (!(mean_e >= 0) || !(K >= 0)) throw Error("bad-params", "inputs must be >= 0");
  return mean_e + fraction(n, N) * K;
}

double regularized_beta(double x, double a, double b) {
  if (!(a > 0) || !(b > 0)) throw Error("bad-params", "beta parameters must be > 0");
  if (x <= 0) return 0.0;
  if (x >= 1) return 1.0;
  const double front =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
               b * std::log1p(-x));
  if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(x, a, b) / a;
  return 1.0 - front * beta_cf(1.0 - x, b, a) / b;
}

double median_cdf(long N, double F) {
  if (N < 0) throw Error("bad-horizon", "need N >= 0");
  if (!(F >= 0 && F <= 1)) throw Error("bad-params", "F must lie in [0, 1]");
  if (F == 0.0) return 0.0;
  if (F == 1.0) return 1.0;
  if (F == 0.5) return 0.5;
  // Symmetry I_F = 1 - I_{1-F}; evaluate on the smaller side.
  const bool flip = F > 0.5;
  const double x = flip ? 1.0 - F : F;
  double lower;
  if (N <= 20) {
    // P{Binomial(2N+1, x) >= N+1}, summed from the largest term down.
    const long M = 2 * N + 1;
    double coef = 1.0;  // C(M, j) for j = N+1, built exactly in doubles
    for (long i = 1; i <= N + 1; ++i) coef = coef * static_cast<double>(M - N - 1 + i) / i;
    double s = 0.0;
    for (long j = N + 1; j <= M; ++j) {
      s += coef * std::pow(x, static_cast<double>(j)) * std::pow(1.0 - x, static_cast<double>(M - j));
      coef = coef * static_cast<double>(M - j) / static_cast<double>(j + 1);
    }
    lower = s;
  } else {
    lower = regularized_beta(x, static_cast<double>(N + 1), static_cast<double>(N + 1));
  }
  return flip ? 1.0 - lower : lower;
}

std::pair<double, double> median_tail_bounds(long N, double p_left, double p_right) {
  if (N < 1) throw Error("bad-horizon", "need N >= 1");
  if (!(p_left >= 0 && p_left <= 1) || !(p_right >= 0 && p_right <= 1))
    throw Error("bad-params", "probabilities must lie in [0, 1]");
  const double factor = static_cast<double>(2 * N + 1) / static_cast<double>(N);
  return {std::min(1.0, factor * p_left), std::min(1.0, factor * p_right)};
}

}  // namespace finipost
