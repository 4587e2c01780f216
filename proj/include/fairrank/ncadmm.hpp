#pragma once

// Non-convex ADMM around the proximal solver and the rank-sum projection:
//   M^{t+1}   = argmin_M phi(M) + rho/2 ||M - M_S^t + V^t||^2   (solve_inner)
//   M_S^{t+1} = Pi_Q(M^{t+1} + V^t)                             (project_onto_q)
//   V^{t+1}   = V^t + M^{t+1} - M_S^{t+1}
// run() executes a fixed number of outer steps; there is no convergence test.

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fairrank/dataset.hpp"
#include "fairrank/projection.hpp"
#include "fairrank/proximal.hpp"
#include "fairrank/ranking.hpp"

namespace fairrank {

struct SolverConfig {
  double rho = 0.001;
  double beta = 0.01;
  double gamma = 1.0;
  double theta = 0.01;
  double epsilon = 0.01;
  std::uint64_t tau = kDefaultSearchBreadth;
  int outer_iters = 30;
  int inner_iters = 50;
  std::uint64_t seed = 0;
  bool fairness_enabled = true;
  KappaConvention kappa = KappaConvention::Derived;

  void validate() const;
  ProximalParams proximal() const { return {rho, gamma, theta, beta}; }
};

struct TraceRecord {
  int iteration = 0;
  double objective = 0.0;        // last inner-sweep objective
  double primal_residual = 0.0;  // ||M - M_S||_2
  bool feasible = true;
  double r_a = 0.0;              // sum-rank of A in M_S (demotion convention)
  double auc = 0.0;              // AUC of M_S (demotion convention)
  std::size_t demoted = 0;
  ProjectionRoute route = ProjectionRoute::Identity;
};

using SolverTrace = std::vector<TraceRecord>;

struct SolverState {
  ProximalState prox;
  Eigen::VectorXd m_s;
  Eigen::VectorXd v;
  IndexSet demoted;
  ConstraintSpec spec;
  SolverTrace trace;
};

/// W = 0, lambda = 0; M, M_S, V drawn from U[0, 1) with the configured seed.
/// With fairness disabled M_S = M and V = 0.
SolverState init_state(const TaskDataset& data, const SolverConfig& config);

/// One outer iteration. Throws InfeasibleError if the band is unreachable.
void step(SolverState& state, const TaskDataset& data, const SolverConfig& config);

struct RunResult {
  Eigen::MatrixXd weights;
  Eigen::VectorXd fitted;  // XW of the final weights
  Eigen::VectorXd m;       // M of the last step
  Eigen::VectorXd m_s;     // projected predictions
  IndexSet demoted;
  ConstraintSpec spec;
  SolverTrace trace;
};

RunResult run(const TaskDataset& data, const SolverConfig& config);

}  // namespace fairrank
