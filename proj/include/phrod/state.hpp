#ifndef PHROD_STATE_HPP
#define PHROD_STATE_HPP

#include "phrod/types.hpp"

namespace phrod {

// Index bookkeeping for the global unknown x = (q, v, sigma_0..sigma_m, lambda).
// q = (all centerline nodes, then all director nodes); v mirrors q. Stress
// blocks hold (all N nodes, then all M nodes); the elastic branch comes first.
struct StateLayout {
  int n_nodes = 0;
  int n_stress = 0;
  int n_branches = 0;  // viscous Maxwell branches

  int q_size() const { return 12 * n_nodes; }
  int stress_size() const { return 6 * n_stress; }
  int lambda_size() const { return 6 * n_nodes; }
  int n_stress_blocks() const { return n_branches + 1; }
  int dim() const {
    return 2 * q_size() + n_stress_blocks() * stress_size() + lambda_size();
  }

  int q_offset() const { return 0; }
  int v_offset() const { return q_size(); }
  int phi_offset(int node) const { return 3 * node; }
  int dir_offset(int node) const { return 3 * n_nodes + 9 * node; }
  int vphi_offset(int node) const { return v_offset() + phi_offset(node); }
  int vdir_offset(int node) const { return v_offset() + dir_offset(node); }

  // block = 0 is the long-term elastic branch.
  int stress_offset(int block) const { return 2 * q_size() + block * stress_size(); }
  int normal_offset(int block, int stress_node) const {
    return stress_offset(block) + 3 * stress_node;
  }
  int moment_offset(int block, int stress_node) const {
    return stress_offset(block) + 3 * n_stress + 3 * stress_node;
  }
  int lambda_offset() const { return 2 * q_size() + n_stress_blocks() * stress_size(); }
  int lambda_node_offset(int node) const { return lambda_offset() + 6 * node; }
};

struct GlobalState {
  VecX x;
  double t = 0.0;
};

}  // namespace phrod

#endif
