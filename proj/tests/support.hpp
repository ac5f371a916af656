#pragma once

#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include <doctest.h>

#include "finipost/error.hpp"
#include "finipost/measure.hpp"
#include "finipost/rng.hpp"

namespace support {

using namespace finipost;

inline AtomicMeasure line(std::initializer_list<std::pair<double, double>> atoms) {
  std::vector<Atom> v;
  for (auto [x, w] : atoms) v.push_back({Point::scalar(x), w});
  return AtomicMeasure::from_atoms(Space::real_line(), std::move(v));
}

inline AtomicMeasure letters(std::vector<double> w) {
  std::vector<Atom> v;
  for (std::size_t j = 0; j < w.size(); ++j) v.push_back({Point::label(j), w[j]});
  return AtomicMeasure::from_atoms(Space::finite(w.size()), std::move(v));
}

inline Sample reals(std::initializer_list<double> xs) {
  Sample s{Space::real_line(), {}};
  for (double x : xs) s.values.push_back(Point::scalar(x));
  return s;
}

inline Sample labels(std::size_t k, std::initializer_list<std::size_t> xs) {
  Sample s{Space::finite(k), {}};
  for (auto x : xs) s.values.push_back(Point::label(x));
  return s;
}

// Random atomic measure on a small integer-valued grid of the line.
inline AtomicMeasure random_line(Rng& rng, std::size_t max_atoms = 6, double scale = 4.0) {
  const std::size_t k = 1 + rng.below(max_atoms);
  std::vector<Atom> v;
  double total = 0.0;
  std::vector<double> w(k);
  for (auto& x : w) total += (x = rng.uniform_open());
  for (std::size_t i = 0; i < k; ++i)
    v.push_back({Point::scalar(scale * (2.0 * rng.uniform() - 1.0)), w[i] / total});
  return AtomicMeasure::from_atoms(Space::real_line(), std::move(v));
}

inline std::vector<double> random_simplex(Rng& rng, std::size_t k) {
  std::vector<double> w(k);
  double total = 0.0;
  for (auto& x : w) total += (x = -std::log(rng.uniform_open()));
  for (auto& x : w) x /= total;
  return w;
}

template <class Fn>
std::string error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return "";
}

}  // namespace support
