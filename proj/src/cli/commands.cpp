#include "cli/commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "fairrank/error.hpp"
#include "fairrank/kernels.hpp"

namespace fairrank::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

using Clock = std::chrono::steady_clock;

const std::vector<double> kDefaultEpsilons{0.01, 0.05, 0.1, 0.25};

std::vector<double> default_betas() {
  std::vector<double> b;
  for (int e = -4; e <= 4; ++e) b.push_back(std::pow(10.0, e));
  return b;
}

RunManifest start_manifest(const std::string& command, const Options& opts) {
  RunManifest m;
  m.command = command;
  m.version = version_string();
  m.isa = std::string(kernels::name(kernels::active().isa));
  m.options = opts;
  return m;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

fs::path prepare_dir(const Options& opts) {
  const fs::path dir = opts.str("output_dir", ".");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir.string() + "': " + ec.message());
  return dir;
}

// Records an input file by absolute path and content hash, and rewrites the
// option to the absolute path so manifests are location independent.
fs::path register_input(Options& opts, RunManifest& m, const std::string& key) {
  const fs::path p = fs::absolute(opts.require(key)).lexically_normal();
  if (!fs::exists(p)) throw DataError("input file not found: " + p.string());
  opts.set(key, p.string());
  m.options = opts;
  m.inputs.push_back({p.string(), fnv1a_file(p)});
  return p;
}

kernels::Isa parse_isa(const std::string& name) {
  for (auto isa : {kernels::Isa::Scalar, kernels::Isa::Avx2, kernels::Isa::Neon}) {
    if (kernels::name(isa) == name) return isa;
  }
  throw UsageError("unknown kernel variant '" + name + "'");
}

// Runs `count` independent jobs on up to `jobs` threads.
void parallel_for(std::size_t count, std::size_t jobs, const std::function<void(std::size_t)>& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Sample standard deviation; 0 for fewer than two values.
double sd_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double mu = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

// Standardizes `data` with statistics estimated elsewhere.
TaskDataset apply_standardization(const TaskDataset& data, const StandardizationParams& p) {
  TaskDataset out = data;
  for (auto& x : out.features) {
    for (Eigen::Index c = 1; c < x.cols(); ++c) {
      const auto cc = static_cast<std::size_t>(c);
      if (p.constant[cc]) {
        x.col(c).setZero();
      } else {
        x.col(c) = (x.col(c).array() - p.mean[cc]) / p.sd[cc];
      }
    }
  }
  for (Eigen::Index i = 0; i < out.targets.size(); ++i) out.targets[i] = p.forward_target(data.targets[i]);
  return out;
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitUsage;
  if (dynamic_cast<const InfeasibleError*>(&e)) return kExitInfeasible;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const InstanceTooLarge*>(&e) ||
      dynamic_cast<const fs::filesystem_error*>(&e)) {
    return kExitData;
  }
  return 1;
}

SolverConfig solver_config(const Options& opts) {
  SolverConfig c;
  c.rho = opts.real("rho", c.rho);
  c.beta = opts.real("beta", c.beta);
  c.gamma = opts.real("gamma", c.gamma);
  c.theta = opts.real("theta", c.theta);
  c.epsilon = opts.real("epsilon", c.epsilon);
  c.tau = opts.count("tau", c.tau);
  c.outer_iters = static_cast<int>(opts.count("outer_iters", static_cast<std::uint64_t>(c.outer_iters)));
  c.inner_iters = static_cast<int>(opts.count("inner_iters", static_cast<std::uint64_t>(c.inner_iters)));
  c.seed = opts.count("seed", c.seed);
  c.fairness_enabled = opts.boolean("fairness", c.fairness_enabled);
  const std::string kappa = opts.str("kappa", "derived");
  if (kappa == "derived") {
    c.kappa = KappaConvention::Derived;
  } else if (kappa == "printed") {
    c.kappa = KappaConvention::Printed;
  } else {
    throw UsageError("option 'kappa' must be 'derived' or 'printed'");
  }
  c.validate();
  return c;
}

SyntheticSpec synthetic_spec(const Options& opts) {
  SyntheticSpec s;
  s.alpha = opts.real("alpha", s.alpha);
  s.k = opts.count("k", s.k);
  s.h = opts.count("h", s.h);
  s.n = opts.count("n", s.n);
  s.sd = opts.real("sd", s.sd);
  s.mean_gap = opts.maybe_real("mean_gap");
  s.seed = opts.count("seed", s.seed);
  return s;
}

CsvSchema csv_schema(const Options& opts) {
  CsvSchema s;
  s.task_column = opts.str("task_column", s.task_column);
  s.protected_column = opts.str("protected_column", s.protected_column);
  s.target_column = opts.str("target_column", s.target_column);
  if (opts.has("label_a")) s.label_a = opts.str("label_a", "");
  return s;
}

TrainOutput train_model(const TaskDataset& raw, const SolverConfig& config) {
  TrainOutput out;
  out.standardized = standardize(raw);
  out.result = run(out.standardized.data, config);
  const auto& p = out.standardized.params;
  std::vector<bool> down(raw.size(), false);
  for (auto i : out.result.demoted) down[i] = true;
  out.rows.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const auto e = static_cast<Eigen::Index>(i);
    PredictionRow r;
    r.index = i;
    r.task_id = raw.task_ids[i / raw.h];
    r.protected_label = raw.groups[i] == Group::A ? raw.label_a : raw.label_b;
    r.target = raw.targets[e];
    r.prediction = p.inverse_target(out.result.fitted[e]);
    r.projected = p.inverse_target(out.result.m_s[e]);
    r.demoted = down[i];
    out.rows.push_back(std::move(r));
  }
  return out;
}

std::vector<MetricsReport> evaluate_rows(const TaskDataset& data, const std::vector<PredictionRow>* predictions) {
  const std::size_t n = data.size();
  const std::span<const double> y(data.targets.data(), n);
  std::vector<MetricsReport> rows;
  rows.push_back(evaluate("data", y, y, y, data.groups));
  if (!predictions) return rows;
  if (predictions->size() != n) {
    throw DataError("row-count mismatch: dataset has " + std::to_string(n) + " rows, predictions have " +
                    std::to_string(predictions->size()));
  }
  std::vector<double> raw(n), projected(n);
  IndexSet demoted;
  for (std::size_t i = 0; i < n; ++i) {
    const PredictionRow& r = (*predictions)[i];
    if (r.index != i || r.task_id != data.task_ids[i / data.h]) {
      throw DataError("predictions row " + std::to_string(i + 1) + " does not align with the dataset (index " +
                      std::to_string(r.index) + ", task '" + r.task_id + "')");
    }
    raw[i] = r.prediction;
    projected[i] = r.projected;
    if (r.demoted) demoted.push_back(i);
  }
  rows.push_back(evaluate("raw", y, raw, raw, data.groups));
  const DemotionRanking keys = demotion_rank(projected, demoted, data.groups);
  rows.push_back(evaluate("projected", y, projected, keys.ranks.ranks, data.groups));
  return rows;
}

std::string report_csv(const std::vector<MetricsReport>& rows) {
  std::ostringstream os;
  os << "label,AUC,MD,BR,IRR,RMSE,n_a,n_b\n";
  for (const auto& r : rows) {
    os << r.label << ',' << format_double(r.auc) << ',' << format_double(r.md) << ',' << format_double(r.br) << ','
       << format_double(r.irr) << ',' << format_double(r.rmse) << ',' << r.n_a << ',' << r.n_b << '\n';
  }
  return os.str();
}

std::string report_json(const std::vector<MetricsReport>& rows) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : rows) {
    arr.push_back({{"label", r.label},
                   {"AUC", r.auc},
                   {"MD", r.md},
                   {"BR", r.br},
                   {"IRR", r.irr},
                   {"RMSE", r.rmse},
                   {"discriminatory", is_discriminatory(r.irr)},
                   {"n_a", r.n_a},
                   {"n_b", r.n_b}});
  }
  return arr.dump(2) + "\n";
}

CommandResult cmd_generate(Options opts) {
  const auto t0 = Clock::now();
  opts.require("alpha");
  const fs::path output = opts.require("output");
  const SyntheticSpec spec = synthetic_spec(opts);
  const TaskDataset data = generate_synthetic(spec);
  if (output.has_parent_path()) fs::create_directories(output.parent_path());
  write_csv(data, output);

  CommandResult r;
  r.manifest = start_manifest("generate", opts);
  r.manifest.seconds = seconds_since(t0);
  r.manifest_path = fs::path(output.string() + ".manifest.json");
  const fs::path dir = output.has_parent_path() ? output.parent_path() : fs::path(".");
  finish_manifest(r.manifest, dir, {output.filename().string()}, r.manifest_path);
  std::ostringstream os;
  os << "wrote " << data.size() << " rows (" << data.k << " tasks x " << data.h << ") to " << output.string();
  r.summary = os.str();
  return r;
}

CommandResult cmd_train(Options opts) {
  const auto t0 = Clock::now();
  CommandResult r;
  r.manifest = start_manifest("train", opts);
  const fs::path data_path = register_input(opts, r.manifest, "data");
  const SolverConfig config = solver_config(opts);
  const fs::path dir = prepare_dir(opts);
  const TaskDataset raw = load_csv(data_path, csv_schema(opts));
  const TrainOutput out = train_model(raw, config);

  write_text(dir / "weights.csv", weights_csv(out.standardized.data, out.result.weights));
  write_text(dir / "predictions.csv", predictions_csv(out.rows));
  write_text(dir / "trace.csv", trace_csv(out.result.trace));
  r.manifest.seconds = seconds_since(t0);
  r.manifest_path = dir / "manifest.json";
  finish_manifest(r.manifest, dir, {"weights.csv", "predictions.csv", "trace.csv"}, r.manifest_path);

  const TraceRecord& last = out.result.trace.back();
  std::ostringstream os;
  os << "trained " << out.result.trace.size() << " outer iterations; final r_A " << format_double(last.r_a)
     << " in [" << format_double(out.result.spec.lower) << ", " << format_double(out.result.spec.upper())
     << "], projected AUC " << format_double(last.auc) << (last.feasible ? "" : " (outside band)");
  r.summary = os.str();
  return r;
}

CommandResult cmd_evaluate(Options opts) {
  const auto t0 = Clock::now();
  CommandResult r;
  r.manifest = start_manifest("evaluate", opts);
  const fs::path data_path = register_input(opts, r.manifest, "data");
  std::vector<PredictionRow> preds;
  const bool with_predictions = opts.has("predictions");
  if (with_predictions) preds = read_predictions(register_input(opts, r.manifest, "predictions"));
  const fs::path dir = prepare_dir(opts);
  const TaskDataset data = load_csv(data_path, csv_schema(opts));
  const auto rows = evaluate_rows(data, with_predictions ? &preds : nullptr);

  write_text(dir / "report.csv", report_csv(rows));
  write_text(dir / "report.json", report_json(rows));
  r.manifest.seconds = seconds_since(t0);
  r.manifest_path = dir / "manifest.json";
  finish_manifest(r.manifest, dir, {"report.csv", "report.json"}, r.manifest_path);
  std::ostringstream os;
  for (const auto& row : rows) {
    os << row.label << ": AUC " << format_double(row.auc) << ", MD " << format_double(row.md) << ", BR "
       << format_double(row.br) << ", IRR " << format_double(row.irr) << '\n';
  }
  r.summary = os.str();
  return r;
}

SweepResult run_sweep(const TaskDataset& raw, const SweepSettings& s) {
  if (s.betas.empty() || s.epsilons.empty()) throw UsageError("sweep grid is empty");
  if (s.folds < 2) throw UsageError("sweep needs at least two folds");
  if (s.repeats < 1) throw UsageError("repeat count must be >= 1");
  s.base.validate();

  const std::size_t nb = s.betas.size(), ne = s.epsilons.size(), nf = s.folds, nr = s.repeats;
  std::vector<std::vector<Fold>> folds(nr);
  for (std::size_t rep = 0; rep < nr; ++rep) folds[rep] = split_folds(raw, nf, s.base.seed + rep);

  // (repeat, beta, epsilon, fold) -> validation RMSE and final feasibility
  const std::size_t jobs_total = nr * nb * ne * nf;
  std::vector<double> rmse(jobs_total);
  std::vector<char> feasible(jobs_total);
  parallel_for(jobs_total, s.jobs, [&](std::size_t job) {
    std::size_t rest = job;
    const std::size_t f = rest % nf;
    rest /= nf;
    const std::size_t e = rest % ne;
    rest /= ne;
    const std::size_t b = rest % nb;
    const std::size_t rep = rest / nb;
    const Fold& fold = folds[rep][f];
    const Standardized train = standardize(subset(raw, fold.train));
    const TaskDataset valid_raw = subset(raw, fold.validation);
    const TaskDataset valid = apply_standardization(valid_raw, train.params);
    SolverConfig c = s.base;
    c.beta = s.betas[b];
    c.epsilon = s.epsilons[e];
    c.seed = s.base.seed + rep;
    const RunResult fit = run(train.data, c);
    const Eigen::VectorXd pred = train.params.inverse_targets(predict(fit.weights, valid));
    rmse[job] = std::sqrt((pred - valid_raw.targets).squaredNorm() / static_cast<double>(pred.size()));
    feasible[job] = fit.trace.back().feasible ? 1 : 0;
  });

  SweepResult out;
  for (std::size_t b = 0; b < nb; ++b) {
    for (std::size_t e = 0; e < ne; ++e) {
      SweepCell cell;
      cell.beta = s.betas[b];
      cell.epsilon = s.epsilons[e];
      std::vector<double> per_repeat;
      for (std::size_t rep = 0; rep < nr; ++rep) {
        double sum = 0.0;
        for (std::size_t f = 0; f < nf; ++f) {
          const std::size_t job = ((rep * nb + b) * ne + e) * nf + f;
          sum += rmse[job];
          cell.runs += 1;
          cell.feasible_runs += feasible[job] ? 1 : 0;
        }
        per_repeat.push_back(sum / static_cast<double>(nf));
      }
      cell.rmse_mean = mean_of(per_repeat);
      cell.rmse_sd = sd_of(per_repeat);
      out.grid.push_back(cell);
    }
  }
  for (std::size_t e = 0; e < ne; ++e) {
    const SweepCell* best = nullptr;
    for (std::size_t b = 0; b < nb; ++b) {
      const SweepCell& c = out.grid[b * ne + e];
      if (!best || c.rmse_mean < best->rmse_mean) best = &c;
    }
    out.selected.push_back(*best);
  }

  // Full-data refits with the selected beta, one per repeat.
  out.table.resize(ne);
  std::vector<MetricsReport> metrics(ne * nr);
  parallel_for(ne * nr, s.jobs, [&](std::size_t job) {
    const std::size_t e = job / nr, rep = job % nr;
    SolverConfig c = s.base;
    c.beta = out.selected[e].beta;
    c.epsilon = s.epsilons[e];
    c.seed = s.base.seed + rep;
    const TrainOutput fit = train_model(raw, c);
    metrics[job] = evaluate_rows(raw, &fit.rows).back();
  });
  for (std::size_t e = 0; e < ne; ++e) {
    out.table[e].epsilon = s.epsilons[e];
    out.table[e].beta = out.selected[e].beta;
    out.table[e].repeats.assign(metrics.begin() + static_cast<std::ptrdiff_t>(e * nr),
                                metrics.begin() + static_cast<std::ptrdiff_t>((e + 1) * nr));
  }
  return out;
}

CommandResult cmd_sweep(Options opts) {
  const auto t0 = Clock::now();
  CommandResult r;
  r.manifest = start_manifest("sweep", opts);
  const fs::path data_path = register_input(opts, r.manifest, "data");
  SweepSettings s;
  s.base = solver_config(opts);
  s.betas = opts.reals("betas", default_betas());
  s.epsilons = opts.reals("epsilons", kDefaultEpsilons);
  s.folds = opts.count("folds", 10);
  s.repeats = opts.count("repeats", 1);
  s.jobs = opts.count("jobs", 1);
  const fs::path dir = prepare_dir(opts);
  const TaskDataset raw = load_csv(data_path, csv_schema(opts));
  const SweepResult res = run_sweep(raw, s);

  std::ostringstream grid, curve, sel, table;
  grid << "beta,epsilon,rmse_mean,rmse_sd,runs,feasible_runs\n";
  for (const auto& c : res.grid) {
    grid << format_double(c.beta) << ',' << format_double(c.epsilon) << ',' << format_double(c.rmse_mean) << ','
         << format_double(c.rmse_sd) << ',' << c.runs << ',' << c.feasible_runs << '\n';
  }
  curve << "epsilon,rmse\n";
  sel << "epsilon,beta,rmse_mean,rmse_sd,runs,feasible_runs\n";
  for (const auto& c : res.selected) {
    curve << format_double(c.epsilon) << ',' << format_double(c.rmse_mean) << '\n';
    sel << format_double(c.epsilon) << ',' << format_double(c.beta) << ',' << format_double(c.rmse_mean) << ','
        << format_double(c.rmse_sd) << ',' << c.runs << ',' << c.feasible_runs << '\n';
  }
  table << "epsilon,beta,AUC_mean,AUC_sd,MD_mean,MD_sd,BR_mean,BR_sd,IRR_mean,IRR_sd,RMSE_mean,RMSE_sd,repeats\n";
  for (const auto& row : res.table) {
    auto column = [&](double MetricsReport::*field) {
      std::vector<double> v;
      for (const auto& m : row.repeats) v.push_back(m.*field);
      return format_double(mean_of(v)) + "," + format_double(sd_of(v));
    };
    table << format_double(row.epsilon) << ',' << format_double(row.beta) << ',' << column(&MetricsReport::auc)
          << ',' << column(&MetricsReport::md) << ',' << column(&MetricsReport::br) << ','
          << column(&MetricsReport::irr) << ',' << column(&MetricsReport::rmse) << ',' << row.repeats.size() << '\n';
  }

  // Winning configuration for the solver's own epsilon (or the first grid epsilon).
  std::size_t pick = 0;
  for (std::size_t e = 0; e < res.selected.size(); ++e) {
    if (res.selected[e].epsilon == s.base.epsilon) pick = e;
  }
  Options best = opts;
  for (const char* key : {"betas", "epsilons", "folds", "repeats", "jobs", "output_dir", "config"}) best.erase(key);
  best.set("beta", format_double(res.selected[pick].beta));
  best.set("epsilon", format_double(res.selected[pick].epsilon));
  std::ostringstream best_text;
  best_text << "# selected by " << s.folds << "-fold cross validation, mean RMSE "
            << format_double(res.selected[pick].rmse_mean) << "\n";
  for (const auto& [k, v] : best.all()) best_text << k << " = " << v << "\n";

  write_text(dir / "grid.csv", grid.str());
  write_text(dir / "curve.csv", curve.str());
  write_text(dir / "selection.csv", sel.str());
  write_text(dir / "table.csv", table.str());
  write_text(dir / "best.conf", best_text.str());
  r.manifest.seconds = seconds_since(t0);
  r.manifest_path = dir / "manifest.json";
  finish_manifest(r.manifest, dir, {"grid.csv", "curve.csv", "selection.csv", "table.csv", "best.conf"},
                  r.manifest_path);
  std::ostringstream os;
  for (const auto& c : res.selected) {
    os << "epsilon " << format_double(c.epsilon) << ": beta " << format_double(c.beta) << ", RMSE "
       << format_double(c.rmse_mean) << " (" << c.feasible_runs << "/" << c.runs << " feasible)\n";
  }
  r.summary = os.str();
  return r;
}

FuzzInstance random_projection_instance(std::uint64_t seed, std::size_t index, std::size_t max_size) {
  if (max_size < 2) throw UsageError("fuzz instances need at least two entries");
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  std::mt19937_64 rng(seq);
  std::uniform_int_distribution<std::size_t> size(2, max_size);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  std::bernoulli_distribution coin(0.5), tied(0.2);
  static constexpr double kEpsilons[] = {0.0, 0.01, 0.05, 0.1, 0.2};
  std::uniform_int_distribution<std::size_t> eps_pick(0, std::size(kEpsilons) - 1);

  FuzzInstance inst;
  const std::size_t n = size(rng);
  const double a_shift = shift(rng);
  const bool with_ties = tied(rng);
  auto& v = inst.vector;
  while (true) {
    v.values.clear();
    v.groups.clear();
    for (std::size_t i = 0; i < n; ++i) {
      const Group g = coin(rng) ? Group::A : Group::B;
      double x = normal(rng) + (g == Group::A ? a_shift : 0.0);
      if (with_ties) x = std::round(x * 2.0) / 2.0;
      v.values.push_back(x);
      v.groups.push_back(g);
    }
    const auto n_a = std::count(v.groups.begin(), v.groups.end(), Group::A);
    if (n_a > 0 && static_cast<std::size_t>(n_a) < n) break;
  }
  inst.epsilon = kEpsilons[eps_pick(rng)];
  return inst;
}

FuzzRecord score_instance(const FuzzInstance& inst, std::uint64_t tau) {
  const auto& v = inst.vector;
  FuzzRecord rec;
  rec.n = v.values.size();
  rec.n_a = static_cast<std::size_t>(std::count(v.groups.begin(), v.groups.end(), Group::A));
  rec.epsilon = inst.epsilon;
  const ConstraintSpec spec = constraint_bounds(rec.n_a, rec.n - rec.n_a, inst.epsilon);
  const Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(v.values.data(), static_cast<Eigen::Index>(rec.n));
  const ProjectionOutcome h = project_onto_q(m, Eigen::VectorXd::Zero(m.size()), spec, v.groups, tau);
  const ProjectionOutcome o = brute_force_project(v.values, spec, v.groups);
  rec.route = h.route;
  rec.heuristic_feasible = h.feasible;
  rec.recheck_ok = spec.contains(pairwise_sum_rank(v.values, h.demoted, v.groups)) == h.feasible;
  rec.oracle_feasible = o.feasible;
  rec.heuristic_objective = h.objective;
  rec.oracle_objective = o.objective;
  if (h.feasible && o.feasible) rec.ratio = o.objective > 0.0 ? h.objective / o.objective : 1.0;
  return rec;
}

std::vector<FuzzRecord> projection_fuzz(std::size_t count, std::size_t max_size, std::uint64_t seed,
                                        std::uint64_t tau) {
  if (max_size > kOracleMaxSize) {
    throw InstanceTooLarge("fuzz instances are checked against the exhaustive oracle, which supports at most " +
                           std::to_string(kOracleMaxSize) + " entries");
  }
  std::vector<FuzzRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(score_instance(random_projection_instance(seed, i, max_size), tau));
  return out;
}

std::string fuzz_csv(const std::vector<FuzzRecord>& records) {
  std::ostringstream os;
  os << "instance,n,n_a,epsilon,route,heuristic_feasible,recheck_ok,oracle_feasible,heuristic_objective,"
        "oracle_objective,ratio\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    os << i << ',' << r.n << ',' << r.n_a << ',' << format_double(r.epsilon) << ',' << to_string(r.route) << ','
       << r.heuristic_feasible << ',' << r.recheck_ok << ',' << r.oracle_feasible << ','
       << format_double(r.heuristic_objective) << ',' << format_double(r.oracle_objective) << ','
       << format_double(r.ratio) << '\n';
  }
  return os.str();
}

std::string fuzz_summary_json(const std::vector<FuzzRecord>& records) {
  std::size_t feasible = 0, oracle_feasible = 0, recheck_failures = 0, implication_failures = 0, good = 0;
  std::vector<double> ratios;
  std::vector<std::size_t> histogram(11, 0);  // [0, 0.1), ..., [0.9, 1.0), exactly 1
  for (const auto& r : records) {
    oracle_feasible += r.oracle_feasible;
    recheck_failures += !r.recheck_ok;
    if (!r.heuristic_feasible) continue;
    ++feasible;
    if (!r.oracle_feasible) {
      ++implication_failures;
      continue;
    }
    ratios.push_back(r.ratio);
    good += r.ratio >= 0.7;
    const auto bin = r.ratio >= 1.0 ? 10 : static_cast<std::size_t>(std::clamp(r.ratio, 0.0, 0.999) * 10.0);
    histogram[bin] += 1;
  }
  std::sort(ratios.begin(), ratios.end());
  auto quantile = [&](double q) {
    if (ratios.empty()) return 0.0;
    return ratios[static_cast<std::size_t>(q * static_cast<double>(ratios.size() - 1))];
  };
  ordered_json j;
  j["instances"] = records.size();
  j["heuristic_feasible"] = feasible;
  j["oracle_feasible"] = oracle_feasible;
  j["recheck_failures"] = recheck_failures;
  j["feasible_without_oracle_solution"] = implication_failures;
  j["ratio_ge_0_7_share"] = ratios.empty() ? 0.0 : static_cast<double>(good) / static_cast<double>(ratios.size());
  j["ratio_min"] = quantile(0.0);
  j["ratio_p10"] = quantile(0.1);
  j["ratio_p25"] = quantile(0.25);
  j["ratio_median"] = quantile(0.5);
  j["ratio_mean"] = mean_of(ratios);
  ordered_json hist = ordered_json::array();
  for (std::size_t b = 0; b < histogram.size(); ++b) {
    const std::string label = b == 10 ? "1" : format_double(b / 10.0) + "-" + format_double((b + 1) / 10.0);
    hist.push_back({{"bin", label}, {"count", histogram[b]}});
  }
  j["ratio_histogram"] = hist;
  return j.dump(2) + "\n";
}

CommandResult cmd_project(Options opts) {
  const auto t0 = Clock::now();
  CommandResult r;
  r.manifest = start_manifest("project", opts);
  const std::uint64_t tau = opts.count("tau", kDefaultSearchBreadth);
  if (tau == 0) throw UsageError("tau must be positive");

  if (opts.has("fuzz")) {
    const fs::path dir = prepare_dir(opts);
    const auto records = projection_fuzz(opts.count("fuzz", 500), opts.count("max_size", 12), opts.count("seed", 1), tau);
    write_text(dir / "gaps.csv", fuzz_csv(records));
    write_text(dir / "gap_summary.json", fuzz_summary_json(records));
    r.manifest.seconds = seconds_since(t0);
    r.manifest_path = dir / "manifest.json";
    finish_manifest(r.manifest, dir, {"gaps.csv", "gap_summary.json"}, r.manifest_path);
    r.summary = "scored " + std::to_string(records.size()) + " instances; see gap_summary.json";
    return r;
  }

  const fs::path input = register_input(opts, r.manifest, "input");
  const LabelledVector v = read_labelled_vector(input);
  const std::size_t n = v.values.size();
  const auto n_a = static_cast<std::size_t>(std::count(v.groups.begin(), v.groups.end(), Group::A));
  ConstraintSpec spec = constraint_bounds(n_a, n - n_a, opts.real("epsilon", 0.01),
                                          opts.str("kappa", "derived") == "printed" ? KappaConvention::Printed
                                                                                    : KappaConvention::Derived);
  if (opts.has("lower")) spec.lower = opts.real("lower", spec.lower);
  const bool oracle = opts.boolean("oracle", false);
  if (oracle && n > kOracleMaxSize) {
    throw InstanceTooLarge("--oracle supports at most " + std::to_string(kOracleMaxSize) + " entries, got " +
                           std::to_string(n));
  }
  const fs::path dir = prepare_dir(opts);
  const Eigen::VectorXd m = Eigen::Map<const Eigen::VectorXd>(v.values.data(), static_cast<Eigen::Index>(n));
  const ProjectionOutcome h = project_onto_q(m, Eigen::VectorXd::Zero(m.size()), spec, v.groups, tau);

  std::ostringstream csv;
  csv << "index,group,value,projected,demoted\n";
  std::vector<bool> down(n, false);
  for (auto i : h.demoted) down[i] = true;
  for (std::size_t i = 0; i < n; ++i) {
    csv << i << ',' << (v.groups[i] == Group::A ? 'A' : 'B') << ',' << format_double(v.values[i]) << ','
        << format_double(h.projected[static_cast<Eigen::Index>(i)]) << ',' << (down[i] ? 1 : 0) << '\n';
  }
  ordered_json j;
  j["n"] = n;
  j["n_a"] = n_a;
  j["lower"] = spec.lower;
  j["upper"] = spec.upper();
  j["route"] = to_string(h.route);
  j["feasible"] = h.feasible;
  j["achieved_r_a"] = h.achieved_r_a;
  j["objective"] = h.objective;
  j["demoted"] = h.demoted;
  j["candidates"] = h.candidates;
  std::ostringstream os;
  os << "heuristic: " << to_string(h.route) << ", r_A " << format_double(h.achieved_r_a)
     << (h.feasible ? " (feasible)" : " (infeasible)") << ", objective " << format_double(h.objective);
  if (oracle) {
    const ProjectionOutcome o = brute_force_project(v.values, spec, v.groups);
    ordered_json oj;
    oj["feasible"] = o.feasible;
    oj["achieved_r_a"] = o.achieved_r_a;
    oj["objective"] = o.objective;
    oj["demoted"] = o.demoted;
    j["oracle"] = oj;
    if (o.feasible && h.feasible) {
      j["gap"] = o.objective - h.objective;
      j["ratio"] = o.objective > 0.0 ? h.objective / o.objective : 1.0;
      os << "; oracle objective " << format_double(o.objective) << ", gap " << format_double(o.objective - h.objective);
    } else {
      j["gap"] = nullptr;
      os << "; oracle " << (o.feasible ? "feasible" : "infeasible");
    }
  }
  write_text(dir / "outcome.csv", csv.str());
  write_text(dir / "report.json", j.dump(2) + "\n");
  r.manifest.seconds = seconds_since(t0);
  r.manifest_path = dir / "manifest.json";
  finish_manifest(r.manifest, dir, {"outcome.csv", "report.json"}, r.manifest_path);
  r.summary = os.str();
  return r;
}

CommandResult run_command(const std::string& name, const Options& opts) {
  if (name == "generate") return cmd_generate(opts);
  if (name == "train") return cmd_train(opts);
  if (name == "evaluate") return cmd_evaluate(opts);
  if (name == "sweep") return cmd_sweep(opts);
  if (name == "project") return cmd_project(opts);
  throw UsageError("unknown command '" + name + "'");
}

bool ReplayReport::all_match() const {
  return !files.empty() && std::all_of(files.begin(), files.end(), [](const ReplayFile& f) { return f.match(); });
}

ReplayReport replay(const fs::path& manifest_path, const fs::path& output_dir) {
  const RunManifest m = read_manifest(manifest_path);
  for (const auto& in : m.inputs) {
    if (!fs::exists(in.path)) throw DataError("manifest input missing: " + in.path);
    if (fnv1a_file(in.path) != in.fnv1a) throw DataError("manifest input changed since the run: " + in.path);
  }
  Options opts = m.options;
  fs::create_directories(output_dir);
  if (m.command == "generate") {
    opts.set("output", (output_dir / fs::path(opts.require("output")).filename()).string());
  } else {
    opts.set("output_dir", output_dir.string());
  }

  const kernels::Isa before = kernels::active().isa;
  if (!m.isa.empty()) kernels::force(parse_isa(m.isa));
  ReplayReport report;
  try {
    report.rerun = run_command(m.command, opts);
  } catch (...) {
    kernels::force(before);
    throw;
  }
  kernels::force(before);

  const fs::path dir = report.rerun.manifest_path.parent_path();
  for (const auto& out : m.outputs) {
    const fs::path p = (dir.empty() ? fs::path(".") : dir) / out.path;
    report.files.push_back({out.path, out.fnv1a, fs::exists(p) ? fnv1a_file(p) : std::string("missing")});
  }
  return report;
}

}  // namespace fairrank::cli
