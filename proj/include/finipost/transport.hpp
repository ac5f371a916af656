#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "finipost/measure.hpp"

namespace finipost {

/// Dense nonnegative cost matrix, row-major.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  CostMatrix(std::size_t rows, std::size_t cols) : CostMatrix(rows, cols, std::vector<double>(rows * cols, 0.0)) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
  double& at(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const std::vector<double>& entries() const noexcept { return data_; }

 private:
  std::size_t rows_, cols_;
  std::vector<double> data_;
};

/// A coupling of two weight vectors with its cost and the dual potentials
/// certifying optimality: row_duals[i] + col_duals[j] <= cost(i,j).
struct TransportPlan {
  std::size_t rows = 0, cols = 0;
  std::vector<double> coupling;  // row-major
  double cost = 0.0;
  std::vector<double> row_marginal, col_marginal;
  std::vector<double> row_duals, col_duals;

  double operator()(std::size_t i, std::size_t j) const { return coupling[i * cols + j]; }
};

struct PlanCheck {
  bool ok = false;
  std::string reason;  // "", "shape", "negative", "marginal", "cost", "dual", "gap"
  double gap = 0.0;
};

/// The test function certifying a bounded-Lipschitz value: values[i] = f(support[i]).
struct LipschitzDual {
  std::vector<Point> support;
  std::vector<double> values;
};

struct BoundedLipschitz {
  double value = 0.0;
  LipschitzDual dual;
  /// Value of the dual flow problem (min-cost mass transfer where mass may
  /// also be created or destroyed at unit cost); equals `value` at optimum.
  double flow_value = 0.0;
};

enum class Ground { TV, BL, W1Real };

Ground ground_from_string(const std::string& name);
std::string to_string(Ground g);

double w1_real(const AtomicMeasure& p, const AtomicMeasure& q);
double w1_scalar_samples(std::span<const double> xs, std::span<const double> ys);
double tv_finite(const AtomicMeasure& p, const AtomicMeasure& q);
BoundedLipschitz bounded_lipschitz(const AtomicMeasure& p, const AtomicMeasure& q);

/// True when `dual` is 1-bounded and 1-Lipschitz within 1e-9 and its
/// integral against p - q equals `value` within 1e-9.
bool verify_lipschitz_dual(const AtomicMeasure& p, const AtomicMeasure& q,
                           const BoundedLipschitz& result);

/// Exact optimal transport between weight vectors a and b. Uniform
/// equal-size marginals go to the assignment solver, everything else to
/// the network simplex.
TransportPlan solve_discrete_ot(const CostMatrix& cost, std::span<const double> a,
                                std::span<const double> b);

/// Minimum-cost perfect matching of a square matrix (shortest augmenting
/// paths with potentials). Returns column assigned to each row; fills the
/// potentials u, v with u[i] + v[j] <= cost(i,j).
std::vector<std::size_t> solve_assignment(const CostMatrix& cost, std::vector<double>* u = nullptr,
                                          std::vector<double>* v = nullptr);

PlanCheck verify_plan(const TransportPlan& plan, const CostMatrix& cost);

/// Ground distance between two measures.
double ground_distance(const AtomicMeasure& p, const AtomicMeasure& q, Ground ground);

/// Groups identical measures: `representative[c]` is the first index of
/// class c and `class_of[i]` the class of measure i.
struct MeasureClasses {
  std::vector<std::size_t> class_of;
  std::vector<std::size_t> representative;
};
MeasureClasses classify(std::span<const AtomicMeasure> measures);

/// Plug-in W1 between the laws sampled by two equal-size measure lists,
/// under the chosen ground metric.
double meta_w1(std::span<const AtomicMeasure> ps, std::span<const AtomicMeasure> qs, Ground ground);

/// Plug-in W1 for class-level costs: `cost` between class representatives
/// and per-class multiplicities (each side sums to the sample size m).
double class_w1(const CostMatrix& cost, std::span<const double> row_counts,
                std::span<const double> col_counts);

}  // namespace finipost
