#include "finipost/network_simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "finipost/error.hpp"

namespace finipost {

namespace {

class Solver {
 public:
  Solver(std::size_t nodes, std::span<const FlowArc> arcs, std::span<const double> supply)
      : n_(nodes), m_(arcs.size()), root_(nodes) {
    double max_cost = 0.0;
    for (const auto& a : arcs) {
      if (a.from >= n_ || a.to >= n_) throw Error("bad-graph", "arc endpoint out of range");
      if (!std::isfinite(a.cost) || a.cost < 0) throw Error("bad-graph", "arc costs must be finite and >= 0");
      max_cost = std::max(max_cost, a.cost);
    }
    double scale = 0.0;
    for (double s : supply) scale = std::max(scale, std::abs(s));
    flow_eps_ = 1e-14 * std::max(1.0, scale);
    art_cost_ = (max_cost + 1.0) * static_cast<double>(n_ + 1);
    cost_eps_ = 1e-13 * art_cost_;

    const std::size_t total = m_ + n_;
    from_.resize(total);
    to_.resize(total);
    cost_.resize(total);
    flow_.assign(total, 0.0);
    in_tree_.assign(total, 0);
    for (std::size_t e = 0; e < m_; ++e) {
      from_[e] = arcs[e].from;
      to_[e] = arcs[e].to;
      cost_[e] = arcs[e].cost;
    }
    // Strongly feasible start: sources point up to the root, every other
    // node hangs below it.
    tree_arcs_.reserve(n_);
    for (std::size_t u = 0; u < n_; ++u) {
      const std::size_t e = m_ + u;
      cost_[e] = art_cost_;
      if (supply[u] > 0) {
        from_[e] = u;
        to_[e] = root_;
        flow_[e] = supply[u];
      } else {
        from_[e] = root_;
        to_[e] = u;
        flow_[e] = -supply[u];
      }
      in_tree_[e] = 1;
      tree_arcs_.push_back(e);
    }
    parent_.resize(n_ + 1);
    pred_.resize(n_ + 1);
    depth_.resize(n_ + 1);
    pi_.resize(n_ + 1);
    build_tree();
    block_ = std::max<std::size_t>(10, static_cast<std::size_t>(std::sqrt(static_cast<double>(m_))));
  }

  FlowSolution run() {
    std::size_t pivots = 0;
    const std::size_t limit = 50 * (m_ + n_) + 100000;
    for (;;) {
      const std::size_t entering = find_entering();
      if (entering == kNone) break;
      pivot(entering);
      if (++pivots > limit) throw Error("solver-stalled", "network simplex exceeded its pivot budget");
    }
    FlowSolution sol;
    sol.pivots = pivots;
    sol.flow.assign(flow_.begin(), flow_.begin() + static_cast<std::ptrdiff_t>(m_));
    for (auto& f : sol.flow)
      if (f < flow_eps_) f = std::max(f, 0.0);
    sol.potential.assign(pi_.begin(), pi_.begin() + static_cast<std::ptrdiff_t>(n_));
    for (std::size_t e = 0; e < m_; ++e) sol.cost += sol.flow[e] * cost_[e];
    return sol;
  }

 private:
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  double reduced(std::size_t e) const { return cost_[e] + pi_[from_[e]] - pi_[to_[e]]; }

  // Block search over real arcs: scan blocks cyclically, take the most
  // negative reduced cost within the first block that has one.
  std::size_t find_entering() {
    if (m_ == 0) return kNone;
    std::size_t best = kNone;
    double best_rc = -cost_eps_;
    std::size_t scanned_in_block = 0;
    for (std::size_t count = 0; count < m_; ++count) {
      const std::size_t e = next_;
      next_ = next_ + 1 == m_ ? 0 : next_ + 1;
      if (!in_tree_[e]) {
        const double rc = reduced(e);
        if (rc < best_rc) {
          best_rc = rc;
          best = e;
        }
      }
      if (++scanned_in_block == block_) {
        if (best != kNone) return best;
        scanned_in_block = 0;
      }
    }
    return best;
  }

  void pivot(std::size_t in) {
    const std::size_t first = from_[in];
    const std::size_t second = to_[in];
    // Join node of the two tree paths.
    std::size_t a = first, b = second;
    while (a != b) {
      if (depth_[a] >= depth_[b])
        a = parent_[a];
      else
        b = parent_[b];
    }
    const std::size_t join = a;

    // Flow goes first -> second on the entering arc, back second -> join ->
    // first through the tree. Limiting arcs are the ones traversed against
    // their orientation. Ties: strictly on the first path, last-wins on the
    // second, which picks the last blocking arc in cycle order.
    double delta = std::numeric_limits<double>::infinity();
    std::size_t leaving = kNone;
    bool on_first = false;
    for (std::size_t u = first; u != join; u = parent_[u]) {
      const std::size_t e = pred_[u];
      if (from_[e] == u && flow_[e] < delta) {
        delta = flow_[e];
        leaving = e;
        on_first = true;
      }
    }
    for (std::size_t u = second; u != join; u = parent_[u]) {
      const std::size_t e = pred_[u];
      if (to_[e] == u && flow_[e] <= delta) {
        delta = flow_[e];
        leaving = e;
        on_first = false;
      }
    }
    if (leaving == kNone) throw Error("unbounded", "negative cycle in flow network");
    if (delta < 0) delta = 0;

    flow_[in] += delta;
    for (std::size_t u = first; u != join; u = parent_[u]) {
      const std::size_t e = pred_[u];
      flow_[e] += from_[e] == u ? -delta : delta;
    }
    for (std::size_t u = second; u != join; u = parent_[u]) {
      const std::size_t e = pred_[u];
      flow_[e] += from_[e] == u ? delta : -delta;
    }
    flow_[leaving] = 0.0;

    in_tree_[leaving] = 0;
    in_tree_[in] = 1;
    unlink(from_[leaving], leaving);
    unlink(to_[leaving], leaving);
    adj_[from_[in]].push_back(in);
    adj_[to_[in]].push_back(in);
    // The endpoint on the leaving side is cut off with its subtree; hang
    // that subtree from the other endpoint through the entering arc.
    const std::size_t cut = on_first ? first : second;
    const std::size_t anchor = on_first ? second : first;
    hang(cut, anchor, in);
  }

  void unlink(std::size_t u, std::size_t e) {
    auto& list = adj_[u];
    auto it = std::find(list.begin(), list.end(), e);
    *it = list.back();
    list.pop_back();
  }

  // Recompute parent, depth and potentials below `v` after attaching it to
  // `u` through tree arc `e`.
  void hang(std::size_t v, std::size_t u, std::size_t e) {
    queue_.clear();
    set_parent(v, u, e);
    queue_.push_back(v);
    for (std::size_t qi = 0; qi < queue_.size(); ++qi) {
      const std::size_t x = queue_[qi];
      for (std::size_t a : adj_[x]) {
        if (a == pred_[x]) continue;
        const std::size_t y = from_[a] == x ? to_[a] : from_[a];
        set_parent(y, x, a);
        queue_.push_back(y);
      }
    }
  }

  void set_parent(std::size_t v, std::size_t u, std::size_t e) {
    parent_[v] = u;
    pred_[v] = e;
    depth_[v] = depth_[u] + 1;
    // Tree arcs have zero reduced cost.
    pi_[v] = from_[e] == u ? pi_[u] + cost_[e] : pi_[u] - cost_[e];
  }

  void build_tree() {
    adj_.assign(n_ + 1, {});
    for (std::size_t e : tree_arcs_) {
      adj_[from_[e]].push_back(e);
      adj_[to_[e]].push_back(e);
    }
    parent_[root_] = root_;
    pred_[root_] = kNone;
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    for (std::size_t e : adj_[root_]) hang(from_[e] == root_ ? to_[e] : from_[e], root_, e);
  }

  std::size_t n_, m_, root_;
  double art_cost_ = 0, cost_eps_ = 0, flow_eps_ = 0;
  std::vector<std::size_t> from_, to_;
  std::vector<double> cost_, flow_;
  std::vector<char> in_tree_;
  std::vector<std::size_t> tree_arcs_;
  std::vector<std::size_t> parent_, pred_, depth_;
  std::vector<double> pi_;
  std::vector<std::vector<std::size_t>> adj_;
  std::vector<std::size_t> queue_;
  std::size_t block_ = 10, next_ = 0;
};

}  // namespace

FlowSolution network_simplex(std::size_t nodes, std::span<const FlowArc> arcs,
                             std::span<const double> supply) {
  if (supply.size() != nodes) throw Error("bad-graph", "one supply per node");
  return Solver(nodes, arcs, supply).run();
}

}  // namespace finipost
