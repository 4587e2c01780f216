#pragma once

// Convex proximal step: minimizes
//   1/2 ||XW - Y||^2 + beta ||W||_{2,1} + rho/2 ||M - M_S + V||^2
// subject to XW = M, by alternating direction sweeps on the augmented
// Lagrangian with multiplier lambda and penalty gamma:
//   W      <- group-wise shrinkage of c^j = X_j^+ (y_j + gamma M_j + lambda_j) / (1 + gamma)
//   M      <- (rho (M_S - V) - lambda + gamma XW) / (rho + gamma)
//   lambda <- lambda - theta (XW - M)
//
// The M update is the unique stationary point of the augmented Lagrangian in
// M. The lambda step descends along the -lambda^T (XW - M) term.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fairrank/dataset.hpp"

namespace fairrank {

struct ProximalParams {
  double rho = 0.001;
  double gamma = 1.0;
  double theta = 0.01;
  double beta = 0.01;

  void validate() const;
};

struct ProximalState {
  Eigen::MatrixXd weights;  // k x n, row j holds task j's coefficients
  Eigen::VectorXd m;        // length k*h
  Eigen::VectorXd lambda;   // length k*h
  ProximalParams params;
  std::vector<Eigen::MatrixXd> pinv;  // per-task n x h pseudo-inverse
};

/// Moore-Penrose pseudo-inverse via SVD; singular values below
/// rel_tol * sigma_max are treated as zero.
Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

/// Zero weights, zero multiplier, M = 0 and a populated pseudo-inverse cache.
ProximalState make_proximal_state(const TaskDataset& data, const ProximalParams& params);

/// max(||c|| - threshold, 0) * c / ||c||, with 0 for c = 0.
Eigen::VectorXd group_shrink(const Eigen::VectorXd& c, double threshold);

/// Stacked c^j rows (k x n) for the current M and lambda.
Eigen::MatrixXd shrinkage_centers(const ProximalState& state, const TaskDataset& data);

Eigen::MatrixXd update_w_group_shrink(const ProximalState& state, const TaskDataset& data);

/// Uses state.weights for XW.
Eigen::VectorXd update_m_quadratic(const ProximalState& state, const TaskDataset& data,
                                   const Eigen::VectorXd& m_s, const Eigen::VectorXd& v);

/// Uses state.weights and state.m.
Eigen::VectorXd update_lambda(const ProximalState& state, const TaskDataset& data);

/// Flat predictions XW (task-major).
Eigen::VectorXd predict(const Eigen::MatrixXd& weights, const TaskDataset& data);

/// sum_j ||W^j||_2.
double l21_norm(const Eigen::MatrixXd& weights);

double proximal_objective(const ProximalState& state, const TaskDataset& data, const Eigen::VectorXd& m_s,
                          const Eigen::VectorXd& v);

struct InnerResult {
  std::vector<double> objective;  // one value per completed sweep
  double primal_residual = 0.0;   // ||XW - M||_inf after the last sweep
};

/// Runs up to `iters` W / M / lambda sweeps, leaving early once
/// ||XW - M||_inf drops below `tolerance`.
InnerResult solve_inner(ProximalState& state, const TaskDataset& data, const Eigen::VectorXd& m_s,
                        const Eigen::VectorXd& v, int iters, double tolerance = 1e-8);

}  // namespace fairrank
