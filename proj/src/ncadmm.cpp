#include "fairrank/ncadmm.hpp"

#include <random>

#include "fairrank/error.hpp"

namespace fairrank {

void SolverConfig::validate() const {
  proximal().validate();
  if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
  if (tau == 0) throw ConfigError("tau must be positive");
  if (outer_iters < 1) throw ConfigError("outer iteration count must be >= 1");
  if (inner_iters < 1) throw ConfigError("inner iteration count must be >= 1");
}

SolverState init_state(const TaskDataset& data, const SolverConfig& config) {
  config.validate();
  data.validate();
  SolverState s;
  s.prox = make_proximal_state(data, config.proximal());
  s.spec = constraint_bounds(data.count(Group::A), data.count(Group::B), config.epsilon, config.kappa);

  const auto n = static_cast<Eigen::Index>(data.size());
  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  s.prox.m.resize(n);
  s.m_s.resize(n);
  s.v.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) s.prox.m[i] = unit(rng);
  for (Eigen::Index i = 0; i < n; ++i) s.m_s[i] = unit(rng);
  for (Eigen::Index i = 0; i < n; ++i) s.v[i] = unit(rng);
  if (!config.fairness_enabled) {
    s.m_s = s.prox.m;
    s.v.setZero();
  }
  return s;
}

void step(SolverState& state, const TaskDataset& data, const SolverConfig& config) {
  const InnerResult inner = solve_inner(state.prox, data, state.m_s, state.v, config.inner_iters);
  const Eigen::VectorXd& m = state.prox.m;

  TraceRecord rec;
  rec.iteration = static_cast<int>(state.trace.size()) + 1;
  rec.objective = inner.objective.empty() ? 0.0 : inner.objective.back();

  if (config.fairness_enabled) {
    ProjectionOutcome out = project_onto_q(m, state.v, state.spec, data.groups, config.tau);
    state.v += m - out.projected;
    state.m_s = std::move(out.projected);
    state.demoted = std::move(out.demoted);
    rec.feasible = out.feasible;
    rec.r_a = out.achieved_r_a;
    rec.route = out.route;
  } else {
    state.m_s = m;
    state.v.setZero();
    state.demoted.clear();
    const std::span<const double> values(m.data(), static_cast<std::size_t>(m.size()));
    rec.r_a = demotion_rank(values, {}, data.groups).r_a;
    rec.feasible = state.spec.contains(rec.r_a);
  }
  rec.primal_residual = (m - state.m_s).norm();
  rec.auc = auc_from_u(mann_whitney_u(rec.r_a, state.spec.n_a), state.spec.n_a, state.spec.n_b);
  rec.demoted = state.demoted.size();
  state.trace.push_back(rec);
}

RunResult run(const TaskDataset& data, const SolverConfig& config) {
  SolverState state = init_state(data, config);
  for (int t = 0; t < config.outer_iters; ++t) step(state, data, config);
  RunResult r;
  r.weights = state.prox.weights;
  r.fitted = predict(state.prox.weights, data);
  r.m = state.prox.m;
  r.m_s = state.m_s;
  r.demoted = state.demoted;
  r.spec = state.spec;
  r.trace = std::move(state.trace);
  return r;
}

}  // namespace fairrank
