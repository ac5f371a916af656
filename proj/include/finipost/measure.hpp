#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "finipost/distribution.hpp"

namespace finipost {

/// The ambient space of a measure: a finite alphabet {0..k-1}, the real
/// line, or R^d.
struct Space {
  enum class Kind { FiniteAlphabet, RealLine, Euclidean };

  Kind kind = Kind::RealLine;
  std::size_t dim = 1;  // alphabet size k, or d; 1 for the real line

  static Space finite(std::size_t k) { return {Kind::FiniteAlphabet, k}; }
  static Space real_line() { return {Kind::RealLine, 1}; }
  static Space euclidean(std::size_t d) { return {Kind::Euclidean, d}; }

  bool is_scalar() const noexcept { return kind == Kind::RealLine; }
  std::string describe() const;

  friend bool operator==(const Space&, const Space&) = default;
};

struct Label {
  std::size_t index = 0;
  friend auto operator<=>(const Label&, const Label&) = default;
};

/// An element of the sample space. Reals compare bitwise-exact.
class Point {
 public:
  Point() : value_(0.0) {}
  static Point label(std::size_t index) { return Point(Label{index}); }
  static Point scalar(double x) { return Point(x); }
  static Point vector(std::vector<double> x) { return Point(std::move(x)); }

  bool is_label() const noexcept { return std::holds_alternative<Label>(value_); }
  bool is_scalar() const noexcept { return std::holds_alternative<double>(value_); }
  bool is_vector() const noexcept {
    return std::holds_alternative<std::vector<double>>(value_);
  }

  std::size_t label_index() const;
  double scalar() const;
  const std::vector<double>& coords() const;

  bool fits(const Space& space) const;

  /// Euclidean norm for scalars and vectors.
  double norm() const;

  friend bool operator==(const Point&, const Point&) = default;
  friend bool operator<(const Point& a, const Point& b) { return a.value_ < b.value_; }

 private:
  explicit Point(Label l) : value_(l) {}
  explicit Point(double x) : value_(x) {}
  explicit Point(std::vector<double> x) : value_(std::move(x)) {}

  std::variant<Label, double, std::vector<double>> value_;
};

/// Distance between two points of the same kind: |x-y| for scalars,
/// Euclidean for vectors, discrete 0/1 for labels.
double distance(const Point& a, const Point& b);

struct Atom {
  Point point;
  double weight = 0.0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

/// ξ(n): the first n observations of an exchangeable sequence.
struct Sample {
  Space space;
  std::vector<Point> values;

  std::size_t size() const noexcept { return values.size(); }
  bool empty() const noexcept { return values.empty(); }
};

/// Probability measure with finite support. Atoms are kept sorted by point,
/// merged on exact equality, zero weights dropped, total mass 1.
class AtomicMeasure {
 public:
  /// Validates and normalizes. Weights must be finite, >= 0 and sum to 1
  /// within 1e-9 (the result is rescaled to 1).
  static AtomicMeasure from_atoms(Space space, std::vector<Atom> atoms);
  static AtomicMeasure dirac(Space space, Point at);

  const Space& space() const noexcept { return space_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }

  /// Weight vector over {0..k-1}; finite-alphabet measures only.
  std::vector<double> label_weights() const;

  double total_mass() const;

  friend bool operator==(const AtomicMeasure&, const AtomicMeasure&) = default;

 private:
  AtomicMeasure(Space space, std::vector<Atom> atoms)
      : space_(space), atoms_(std::move(atoms)) {}

  Space space_;
  std::vector<Atom> atoms_;
};

/// Right-continuous distribution function: a step function from atoms or a
/// named analytic family.
class Cdf {
 public:
  struct Step {
    double threshold;
    double cumulative;
  };

  static Cdf step(std::vector<Step> steps);
  static Cdf analytic(BaseDistribution family);

  bool is_step() const noexcept { return !family_.has_value(); }
  const std::vector<Step>& steps() const noexcept { return steps_; }
  const BaseDistribution& family() const { return *family_; }

  double operator()(double x) const;

 private:
  std::vector<Step> steps_;
  std::optional<BaseDistribution> family_;
};

using PointFunction = std::function<double(const Point&)>;

AtomicMeasure empirical(const Sample& sample);
AtomicMeasure mixture(const AtomicMeasure& first, const AtomicMeasure& second, double w);
double integrate(const AtomicMeasure& measure, const PointFunction& f);
Cdf cdf_of(const AtomicMeasure& measure);

/// ∫ sqrt(F(t)(1-F(t))) dt. Exact for step CDFs; adaptive quadrature with
/// absolute error about `tol` for analytic families.
double l21_functional(const Cdf& cdf, double tol = 1e-9);

/// Gini mean difference ∫∫|x-y| p(dx)p(dy).
double gini_md(const AtomicMeasure& measure);

/// ∫ ||x||^order p(dx).
double moment(const AtomicMeasure& measure, double order);

/// Atom list CSV: `point,weight`, `p1,...,pd,weight` or `label,weight`.
void write_atoms_csv(std::ostream& out, const AtomicMeasure& measure);
AtomicMeasure read_atoms_csv(std::istream& in);

}  // namespace finipost
