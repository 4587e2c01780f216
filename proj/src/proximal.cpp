#include "fairrank/proximal.hpp"

#include <cmath>
#include <string>

#include "fairrank/error.hpp"
#include "fairrank/kernels.hpp"

namespace fairrank {

namespace {

std::span<const double> view(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

void check_length(const Eigen::VectorXd& v, const TaskDataset& data, const char* what) {
  if (static_cast<std::size_t>(v.size()) != data.size()) {
    throw DataError(std::string(what) + " has length " + std::to_string(v.size()) + ", expected " +
                    std::to_string(data.size()));
  }
}

}  // namespace

void ProximalParams::validate() const {
  if (!(rho > 0.0)) throw ConfigError("rho must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (!(theta > 0.0)) throw ConfigError("theta must be > 0");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
}

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& a, double rel_tol) {
  if (a.size() == 0) return Eigen::MatrixXd::Zero(a.cols(), a.rows());
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  const double cutoff = rel_tol * (s.size() > 0 ? s[0] : 0.0);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > cutoff && s[i] > 0.0) inv[i] = 1.0 / s[i];
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

ProximalState make_proximal_state(const TaskDataset& data, const ProximalParams& params) {
  params.validate();
  ProximalState s;
  s.params = params;
  s.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(data.k), static_cast<Eigen::Index>(data.n));
  s.m = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.size()));
  s.lambda = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.size()));
  s.pinv.reserve(data.k);
  for (const auto& x : data.features) s.pinv.push_back(pseudo_inverse(x));
  return s;
}

Eigen::VectorXd group_shrink(const Eigen::VectorXd& c, double threshold) {
  const double norm = c.norm();
  if (norm == 0.0) return Eigen::VectorXd::Zero(c.size());
  const double keep = std::max(norm - threshold, 0.0);
  if (keep == 0.0) return Eigen::VectorXd::Zero(c.size());
  return (keep / norm) * c;
}

Eigen::MatrixXd shrinkage_centers(const ProximalState& state, const TaskDataset& data) {
  check_length(state.m, data, "M");
  check_length(state.lambda, data, "lambda");
  const double gamma = state.params.gamma;
  Eigen::MatrixXd centers(static_cast<Eigen::Index>(data.k), static_cast<Eigen::Index>(data.n));
  for (std::size_t j = 0; j < data.k; ++j) {
    const auto y = data.task_slice(data.targets, j);
    const auto m = data.task_slice(state.m, j);
    const auto lambda = data.task_slice(state.lambda, j);
    const Eigen::VectorXd rhs = (y + gamma * m + lambda) / (1.0 + gamma);
    centers.row(static_cast<Eigen::Index>(j)) = (state.pinv[j] * rhs).transpose();
  }
  return centers;
}

Eigen::MatrixXd update_w_group_shrink(const ProximalState& state, const TaskDataset& data) {
  const Eigen::MatrixXd centers = shrinkage_centers(state, data);
  const double threshold = state.params.beta / (state.params.gamma + 1.0);
  Eigen::MatrixXd w(centers.rows(), centers.cols());
  for (Eigen::Index j = 0; j < centers.rows(); ++j) {
    w.row(j) = group_shrink(centers.row(j).transpose(), threshold).transpose();
  }
  return w;
}

Eigen::VectorXd predict(const Eigen::MatrixXd& weights, const TaskDataset& data) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(data.size()));
  for (std::size_t j = 0; j < data.k; ++j) {
    data.task_slice(out, j) = data.features[j] * weights.row(static_cast<Eigen::Index>(j)).transpose();
  }
  return out;
}

Eigen::VectorXd update_m_quadratic(const ProximalState& state, const TaskDataset& data, const Eigen::VectorXd& m_s,
                                   const Eigen::VectorXd& v) {
  check_length(m_s, data, "M_S");
  check_length(v, data, "V");
  const Eigen::VectorXd xw = predict(state.weights, data);
  Eigen::VectorXd m(xw.size());
  kernels::active().m_update(m.data(), m_s.data(), v.data(), state.lambda.data(), xw.data(), state.params.rho,
                             state.params.gamma, static_cast<std::size_t>(m.size()));
  return m;
}

Eigen::VectorXd update_lambda(const ProximalState& state, const TaskDataset& data) {
  const Eigen::VectorXd xw = predict(state.weights, data);
  Eigen::VectorXd lambda = state.lambda;
  kernels::active().lambda_update(lambda.data(), xw.data(), state.m.data(), state.params.theta,
                                  static_cast<std::size_t>(lambda.size()));
  return lambda;
}

double l21_norm(const Eigen::MatrixXd& weights) { return weights.rowwise().norm().sum(); }

double proximal_objective(const ProximalState& state, const TaskDataset& data, const Eigen::VectorXd& m_s,
                          const Eigen::VectorXd& v) {
  const Eigen::VectorXd xw = predict(state.weights, data);
  const Eigen::VectorXd anchor = m_s - v;
  return 0.5 * kernels::squared_distance(view(xw), view(data.targets)) + state.params.beta * l21_norm(state.weights) +
         0.5 * state.params.rho * kernels::squared_distance(view(state.m), view(anchor));
}

InnerResult solve_inner(ProximalState& state, const TaskDataset& data, const Eigen::VectorXd& m_s,
                        const Eigen::VectorXd& v, int iters, double tolerance) {
  if (iters < 1) throw ConfigError("inner iteration count must be >= 1");
  InnerResult out;
  for (int it = 0; it < iters; ++it) {
    state.weights = update_w_group_shrink(state, data);
    state.m = update_m_quadratic(state, data, m_s, v);
    state.lambda = update_lambda(state, data);
    out.objective.push_back(proximal_objective(state, data, m_s, v));
    const Eigen::VectorXd xw = predict(state.weights, data);
    out.primal_residual = kernels::max_abs_diff(view(xw), view(state.m));
    if (out.primal_residual < tolerance) break;
  }
  return out;
}

}  // namespace fairrank
