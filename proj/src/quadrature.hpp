#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <queue>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace finipost::detail {

// Globally adaptive Gauss-Kronrod: keep splitting the piece with the
// largest error estimate until the summed estimate is below
// max(abs_tol, rel_tol·|value|). Infinite ends are mapped to a finite range.
inline double adaptive_gk(const std::function<double(double)>& f, double a, double b,
                          double abs_tol, double rel_tol = 0.0, int max_splits = 4000) {
  if (!(a < b)) return 0.0;
  const bool lo_inf = std::isinf(a), hi_inf = std::isinf(b);
  std::function<double(double)> h = f;
  double lo = a, hi = b;
  if (lo_inf && hi_inf) {
    h = [&f](double t) {
      const double d = 1 - t * t;
      return f(t / d) * (1 + t * t) / (d * d);
    };
    lo = -1, hi = 1;
  } else if (hi_inf) {
    h = [&f, a](double t) { return f(a + t / (1 - t)) / ((1 - t) * (1 - t)); };
    lo = 0, hi = 1;
  } else if (lo_inf) {
    h = [&f, b](double t) { return f(b - t / (1 - t)) / ((1 - t) * (1 - t)); };
    lo = 0, hi = 1;
  }

  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  auto piece = [&](double x, double y) {
    double err = 0.0;
    const double v = Rule::integrate(h, x, y, 0, 0.0, &err);
    return Piece{x, y, v, err};
  };
  std::priority_queue<Piece> heap;
  heap.push(piece(lo, hi));
  double value = heap.top().value, error = heap.top().error;
  for (int splits = 0; error > std::max(abs_tol, rel_tol * std::abs(value)) && splits < max_splits;
       ++splits) {
    const Piece worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    const Piece left = piece(worst.a, mid), right = piece(mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }
  return value;
}

}  // namespace finipost::detail
