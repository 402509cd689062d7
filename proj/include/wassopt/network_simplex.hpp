#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "wassopt/error.hpp"

namespace wassopt {

// Exact solver for the dense balanced transportation problem
//
//   min sum_{ij} cost(i,j) x(i,j)   s.t.  sum_j x(i,j) = supply(i),
//                                         sum_i x(i,j) = demand(j),  x >= 0,
//
// by primal network simplex on the bipartite graph plus an artificial root.
// The basis tree is kept strongly feasible (every zero-flow basic arc points
// toward the root), with the leaving arc chosen as the last blocking arc
// encountered from the cycle apex along the entering arc's orientation; this
// rules out cycling under the heavy degeneracy of uniform-weight instances.
// Intended scale: n, m <= 512 with a dense cost matrix.
class NetworkSimplex {
 public:
  struct Solution {
    Eigen::MatrixXd flow;           // n x m optimal basic flow
    double cost = 0.0;              // objective at the optimum
    Eigen::VectorXd source_potential;  // phi, size n
    Eigen::VectorXd sink_potential;    // psi, size m: phi_i + psi_j <= cost(i,j)
  };

  static Solution solve(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                        const Eigen::VectorXd& demand) {
    NetworkSimplex ns(cost, supply, demand);
    ns.run();
    return ns.extract();
  }

 private:
  // Arc ids: real arcs are i*m_ + j (source i -> sink j); artificial arcs are
  // n_*m_ + k for node k, connecting node k with the root.
  NetworkSimplex(const Eigen::MatrixXd& cost, const Eigen::VectorXd& supply,
                 const Eigen::VectorXd& demand)
      : cost_(cost), n_(cost.rows()), m_(cost.cols()), num_nodes_(n_ + m_ + 1), root_(n_ + m_) {
    require(supply.size() == n_ && demand.size() == m_, ErrorCode::DimensionMismatch,
            "marginal sizes do not match the cost matrix");
    require(std::abs(supply.sum() - demand.sum()) <= 1e-9 * (1.0 + supply.sum()),
            ErrorCode::InvalidMeasure, "unbalanced transportation problem");

    const double max_cost = cost_.size() > 0 ? cost_.cwiseAbs().maxCoeff() : 0.0;
    big_cost_ = 1.0 + max_cost;
    enter_tol_ = 1e-13 * big_cost_;

    parent_.assign(num_nodes_, root_);
    parent_arc_.assign(num_nodes_, -1);
    arc_up_.assign(num_nodes_, true);
    arc_flow_.assign(num_nodes_, 0.0);
    depth_.assign(num_nodes_, 0);
    pi_.assign(num_nodes_, 0.0);

    // All-artificial starting basis: every node hangs off the root. Sources
    // and zero-demand sinks use an upward arc (node -> root), so degenerate
    // arcs start strongly feasible.
    for (int i = 0; i < n_; ++i) {
      parent_arc_[i] = n_ * m_ + i;
      arc_up_[i] = true;
      arc_flow_[i] = supply[i];
    }
    for (int j = 0; j < m_; ++j) {
      const int node = n_ + j;
      parent_arc_[node] = n_ * m_ + node;
      arc_up_[node] = !(demand[j] > 0.0);
      arc_flow_[node] = demand[j];
    }
    parent_[root_] = -1;
    parent_arc_[root_] = -1;
    refresh_tree();
  }

  // Reduced cost of real arc (i -> j) given current potentials.
  double reduced_cost(int i, int j) const { return cost_(i, j) - pi_[i] + pi_[n_ + j]; }

  void run() {
    const long num_arcs = static_cast<long>(n_) * m_;
    const long block = std::max<long>(64, static_cast<long>(std::sqrt(static_cast<double>(num_arcs))));
    const long max_pivots = 1000000L + 2000L * num_nodes_;
    long cursor = 0;

    for (long pivot = 0;; ++pivot) {
      require(pivot < max_pivots, ErrorCode::NoConvergence, "network simplex pivot limit");

      // Block search: scan blocks of consecutive arcs, enter the most
      // negative reduced cost seen in the first block containing one.
      long best_arc = -1;
      double best_rc = -enter_tol_;
      long scanned = 0;
      while (scanned < num_arcs) {
        const long stop = std::min<long>(block, num_arcs - scanned);
        for (long t = 0; t < stop; ++t) {
          const long a = cursor;
          cursor = cursor + 1 == num_arcs ? 0 : cursor + 1;
          const int i = static_cast<int>(a / m_);
          const int j = static_cast<int>(a % m_);
          const double rc = reduced_cost(i, j);
          if (rc < best_rc) {
            best_rc = rc;
            best_arc = a;
          }
        }
        scanned += stop;
        if (best_arc >= 0) break;
      }
      if (best_arc < 0) break;  // optimal

      pivot_on(static_cast<int>(best_arc / m_), n_ + static_cast<int>(best_arc % m_));
    }
  }

  // Perform the basis exchange for entering arc (u -> v).
  void pivot_on(int u, int v) {
    // The pivot cycle is the entering arc plus the tree path v .. apex .. u.
    // Collect both legs up to the lowest common ancestor.
    thread_local std::vector<int> leg_u, leg_v;
    leg_u.clear();
    leg_v.clear();
    int a = u, b = v;
    while (depth_[a] > depth_[b]) { leg_u.push_back(a); a = parent_[a]; }
    while (depth_[b] > depth_[a]) { leg_v.push_back(b); b = parent_[b]; }
    while (a != b) {
      leg_u.push_back(a); a = parent_[a];
      leg_v.push_back(b); b = parent_[b];
    }
    // a == b == apex. Cycle orientation: apex -> u (downward), entering arc
    // u -> v, then v -> apex (upward).

    // Blocking arcs are those traversed against their direction; delta is the
    // least flow among them. Going down through an upward arc is backward, as
    // is going up through a downward arc.
    double delta = std::numeric_limits<double>::infinity();
    for (int node : leg_u)
      if (arc_up_[node]) delta = std::min(delta, arc_flow_[node]);
    for (int node : leg_v)
      if (!arc_up_[node]) delta = std::min(delta, arc_flow_[node]);

    // Leaving arc: last blocking arc from the apex along the cycle
    // orientation. Traversal order is leg_u reversed (apex down to u), then
    // leg_v in order (v up to apex).
    int leave = -1;
    bool leave_on_u_leg = false;
    for (auto it = leg_u.rbegin(); it != leg_u.rend(); ++it)
      if (arc_up_[*it] && arc_flow_[*it] == delta) { leave = *it; leave_on_u_leg = true; }
    for (int node : leg_v)
      if (!arc_up_[node] && arc_flow_[node] == delta) { leave = node; leave_on_u_leg = false; }
    require(leave >= 0, ErrorCode::NoConvergence, "unbounded pivot ray in balanced problem");

    // Apply the flow change around the cycle.
    if (delta > 0.0) {
      for (int node : leg_u) arc_flow_[node] += arc_up_[node] ? -delta : delta;
      for (int node : leg_v) arc_flow_[node] += arc_up_[node] ? delta : -delta;
    }

    // Structural exchange: removing `leave`'s parent arc detaches the subtree
    // holding one endpoint of the entering arc; re-root that subtree at the
    // endpoint and hang it on the other one.
    const int sub_end = leave_on_u_leg ? u : v;    // endpoint inside the detached subtree
    const int out_end = leave_on_u_leg ? v : u;    // endpoint staying with the root side
    const int entering_arc = u * m_ + (v - n_);

    // Reverse parent pointers along sub_end .. leave. Each node on that path
    // takes over the arc it previously shared with its old parent's child
    // side; orientations flip viewpoint (a child -> parent arc becomes a
    // parent -> child arc after re-rooting). sub_end receives the entering
    // arc, which is "up" from its viewpoint iff sub_end is the tail u.
    int prev = out_end;
    int node = sub_end;
    int carry_arc = entering_arc;
    bool carry_up = (sub_end == u);
    double carry_flow = delta;
    while (true) {
      const int old_parent = parent_[node];
      const int old_arc = parent_arc_[node];
      const bool old_up = arc_up_[node];
      const double old_flow = arc_flow_[node];
      const bool at_leave = (node == leave);
      parent_[node] = prev;
      parent_arc_[node] = carry_arc;
      arc_up_[node] = carry_up;
      arc_flow_[node] = carry_flow;
      if (at_leave) break;  // the old arc of `leave` is the one that exits
      prev = node;
      node = old_parent;
      carry_arc = old_arc;
      carry_up = !old_up;
      carry_flow = old_flow;
    }
    refresh_tree();
  }

  // Recompute depths and potentials from the parent structure.
  void refresh_tree() {
    thread_local std::vector<std::vector<int>> children;
    thread_local std::vector<int> stack;
    children.assign(num_nodes_, {});
    for (int node = 0; node < num_nodes_; ++node)
      if (node != root_) children[parent_[node]].push_back(node);

    stack.clear();
    stack.push_back(root_);
    depth_[root_] = 0;
    pi_[root_] = 0.0;
    while (!stack.empty()) {
      const int p = stack.back();
      stack.pop_back();
      for (int c : children[p]) {
        depth_[c] = depth_[p] + 1;
        // Basic arcs have zero reduced cost: cost - pi(tail) + pi(head) = 0.
        const double arc_cost = basic_arc_cost(c);
        pi_[c] = arc_up_[c] ? arc_cost + pi_[p] : pi_[p] - arc_cost;
        stack.push_back(c);
      }
    }
  }

  // Cost of the basic arc joining `node` with its parent.
  double basic_arc_cost(int node) const {
    const int arc = parent_arc_[node];
    if (arc >= n_ * m_) return big_cost_;
    const int i = arc / m_;
    const int j = arc % m_;
    return cost_(i, j);
  }

  Solution extract() const {
    Solution sol;
    sol.flow = Eigen::MatrixXd::Zero(n_, m_);
    for (int node = 0; node < num_nodes_; ++node) {
      if (node == root_ || parent_arc_[node] < 0) continue;
      const int arc = parent_arc_[node];
      if (arc >= n_ * m_) {
        require(arc_flow_[node] <= 1e-9, ErrorCode::NoConvergence,
                "artificial arc kept positive flow");
        continue;
      }
      sol.flow(arc / m_, arc % m_) = std::max(0.0, arc_flow_[node]);
    }
    sol.cost = (sol.flow.array() * cost_.array()).sum();
    sol.source_potential.resize(n_);
    sol.sink_potential.resize(m_);
    for (int i = 0; i < n_; ++i) sol.source_potential[i] = pi_[i];
    for (int j = 0; j < m_; ++j) sol.sink_potential[j] = -pi_[n_ + j];
    return sol;
  }

  // The basis tree is stored on nodes: parent_arc_[k] is the basic arc joining
  // node k with parent_[k]; arc_up_[k] is true when that arc is directed
  // k -> parent (toward the root), and arc_flow_[k] is its flow.
  const Eigen::MatrixXd& cost_;
  int n_, m_, num_nodes_, root_;
  double big_cost_ = 0.0;
  double enter_tol_ = 0.0;
  std::vector<int> parent_;
  std::vector<int> parent_arc_;
  std::vector<char> arc_up_;
  std::vector<double> arc_flow_;
  std::vector<int> depth_;
  std::vector<double> pi_;
};

}  // namespace wassopt
