#pragma once

// Subcommand implementations. Each command takes a fully merged option set
// (config file, then flags), writes its outputs plus a manifest, and returns
// the manifest it wrote. Errors propagate as exceptions; exit_code_for() maps
// them onto the process exit-code contract.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "cli/io.hpp"
#include "cli/manifest.hpp"
#include "cli/options.hpp"
#include "fairrank/dataset.hpp"
#include "fairrank/metrics.hpp"
#include "fairrank/ncadmm.hpp"
#include "fairrank/projection.hpp"

namespace fairrank::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 2,
  kExitInfeasible = 3,
  kExitData = 4,
  kExitMismatch = 5,
};

int exit_code_for(const std::exception& e);

struct CommandResult {
  RunManifest manifest;
  std::filesystem::path manifest_path;
  std::string summary;  // one human-readable line per notable result
};

CommandResult cmd_generate(Options opts);
CommandResult cmd_train(Options opts);
CommandResult cmd_evaluate(Options opts);
CommandResult cmd_sweep(Options opts);
CommandResult cmd_project(Options opts);

/// Dispatches by subcommand name.
CommandResult run_command(const std::string& name, const Options& opts);

struct ReplayFile {
  std::string path;
  std::string expected;
  std::string actual;
  bool match() const { return expected == actual; }
};

struct ReplayReport {
  CommandResult rerun;
  std::vector<ReplayFile> files;
  bool all_match() const;
};

/// Re-executes a manifest into `output_dir` and compares output hashes.
ReplayReport replay(const std::filesystem::path& manifest, const std::filesystem::path& output_dir);

// Building blocks shared with the acceptance suite.

SolverConfig solver_config(const Options& opts);
SyntheticSpec synthetic_spec(const Options& opts);
CsvSchema csv_schema(const Options& opts);

struct TrainOutput {
  Standardized standardized;
  RunResult result;
  std::vector<PredictionRow> rows;  // raw units
};

TrainOutput train_model(const TaskDataset& raw, const SolverConfig& config);

/// Metric rows: "data" (targets against themselves) and, when predictions
/// are given, "raw" and "projected".
std::vector<MetricsReport> evaluate_rows(const TaskDataset& data, const std::vector<PredictionRow>* predictions);

std::string report_csv(const std::vector<MetricsReport>& rows);
std::string report_json(const std::vector<MetricsReport>& rows);

struct SweepSettings {
  SolverConfig base;
  std::vector<double> betas;
  std::vector<double> epsilons;
  std::size_t folds = 10;
  std::size_t repeats = 1;
  std::size_t jobs = 1;
};

struct SweepCell {
  double beta = 0.0;
  double epsilon = 0.0;
  double rmse_mean = 0.0;  // mean over repeats of the fold-averaged validation RMSE
  double rmse_sd = 0.0;
  std::size_t runs = 0;
  std::size_t feasible_runs = 0;
};

struct TableRow {
  double epsilon = 0.0;
  double beta = 0.0;
  std::vector<MetricsReport> repeats;  // projected-prediction metrics, one per repeat
};

struct SweepResult {
  std::vector<SweepCell> grid;       // beta-major
  std::vector<SweepCell> selected;   // best beta per epsilon, epsilon order
  std::vector<TableRow> table;
};

SweepResult run_sweep(const TaskDataset& raw, const SweepSettings& settings);

struct FuzzRecord {
  std::size_t n = 0;
  std::size_t n_a = 0;
  double epsilon = 0.0;
  ProjectionRoute route = ProjectionRoute::Identity;
  bool heuristic_feasible = false;
  bool recheck_ok = false;  // reported feasibility agrees with a pairwise recount
  bool oracle_feasible = false;
  double heuristic_objective = 0.0;
  double oracle_objective = 0.0;
  double ratio = 1.0;  // heuristic / oracle objective when both are feasible
};

struct FuzzInstance {
  LabelledVector vector;
  double epsilon = 0.0;
};

FuzzInstance random_projection_instance(std::uint64_t seed, std::size_t index, std::size_t max_size);
FuzzRecord score_instance(const FuzzInstance& inst, std::uint64_t tau);
std::vector<FuzzRecord> projection_fuzz(std::size_t count, std::size_t max_size, std::uint64_t seed,
                                        std::uint64_t tau);

std::string fuzz_csv(const std::vector<FuzzRecord>& records);
std::string fuzz_summary_json(const std::vector<FuzzRecord>& records);

}  // namespace fairrank::cli
