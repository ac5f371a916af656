#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace finipost {

struct FlowArc {
  std::size_t from;
  std::size_t to;
  double cost;
};

struct FlowSolution {
  std::vector<double> flow;       // per arc
  std::vector<double> potential;  // per node; cost + π[from] - π[to] >= 0 at optimum
  double cost = 0.0;
  std::size_t pivots = 0;
};

/// Uncapacitated min-cost flow with real supplies (positive = source) by the
/// primal network simplex method: big-M artificial root, block pivoting,
/// strongly feasible leaving-arc rule. Supplies must sum to ~0 and every
/// arc cost must be finite and >= 0.
FlowSolution network_simplex(std::size_t nodes, std::span<const FlowArc> arcs,
                             std::span<const double> supply);

}  // namespace finipost
