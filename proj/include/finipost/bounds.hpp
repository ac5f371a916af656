#pragma once

#include <optional>
#include <utility>

namespace finipost {

/// w1(ẽ_N(f), p̃(f)) <= 2 sqrt(E f(ξ1)^2) / sqrt(N).
double mean_bound_unconditional(long N, double Ef2);

/// Conditional version given ξ(n):
/// (n/N)(|sample mean| + |posterior mean|) + 2 sqrt(pred_f2) / sqrt(N - n).
double mean_bound_conditional(long n, long N, double sample_mean_f, double post_mean_f,
                              double pred_f2);

/// Finite alphabet of size k, total-variation ground metric.
double finite_bound(long k, long n, long N);

/// Real line, bounded Lipschitz ground metric; post_l21 = E[Δ(p̃) | ξ(n)].
double real_bound(long n, long N, double post_l21);

/// Support inside [-M, M].
double bounded_support_bound(double M, long n, long N);

/// Δ(p) <= 1 + sqrt(2(1+δ)/δ) (∫|x|^{2+δ} dp)^{1/2}.
double l21_moment_bound(double delta, double m2delta);

/// P{W1 > ε} <= min(1, (e_l21 / sqrt(N - n) + 2n/N) / ε).
double tail_probability_bound(double epsilon, double e_l21, long n, long N);

/// γ = kd / ((k - d)(k - 2)).
double dudley_gamma(long d, long k);

/// R^d bound through the moment route. With `psi` set, the conditional
/// mean of Ψ_k is taken as given instead.
double euclidean_bound(long d, long k, long n, long N, double gamma_moment_post,
                       std::optional<double> psi = std::nullopt);

/// Generic bound for a bounded, convex ground metric with diameter K:
/// ∫ E_{N-n}(p) Q(dp) + nK/N.
double lemma_bound(double mean_e, double K, long n, long N);

/// Regularized incomplete beta I_x(a, b).
double regularized_beta(double x, double a, double b);

/// P{median of 2N+1 i.i.d. draws <= x} = I_F(N+1, N+1) with F = F(x).
double median_cdf(long N, double F);

/// (min(1, (2N+1)/N p_left), min(1, (2N+1)/N p_right)).
std::pair<double, double> median_tail_bounds(long N, double p_left, double p_right);

}  // namespace finipost
