// fairrank_cli: dataset generation, training, evaluation, sweeps and
// standalone projection runs.
//
// Exit codes: 0 success, 2 usage, 3 infeasible band, 4 I/O or data error,
// 5 replay produced different bytes.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cli/commands.hpp"
#include "fairrank/error.hpp"

namespace {

using fairrank::cli::Options;

// Collects flag values under config-file keys. Only flags that were actually
// given end up in the option set, so config-file entries survive otherwise.
class Binder {
 public:
  explicit Binder(CLI::App* app) : app_(app) {
    app_->add_option("--config", config_path_, "Flat key = value config file; flags take precedence");
  }

  void value(const std::string& key, const std::string& flags, const std::string& help) {
    options_.push_back({key, app_->add_option(flags, store_[key], help), {}});
  }

  void required(const std::string& key, const std::string& flags, const std::string& help) {
    value(key, flags, help);
    required_.push_back(key);
  }

  void toggle(const std::string& key, const std::string& flags, const std::string& help, const std::string& when_set) {
    options_.push_back({key, app_->add_flag(flags, help), when_set});
  }

  CLI::App* app() const { return app_; }

  Options collect() const {
    Options out;
    if (!config_path_.empty()) out = fairrank::cli::read_config_file(config_path_);
    for (const auto& o : options_) {
      if (o.option->count() == 0) continue;
      out.set(o.key, o.constant.empty() ? store_.at(o.key) : o.constant);
    }
    for (const auto& key : required_) {
      if (!out.has(key)) throw fairrank::cli::UsageError("missing required option --" + dashed(key));
    }
    return out;
  }

 private:
  static std::string dashed(std::string key) {
    for (auto& c : key) c = c == '_' ? '-' : c;
    return key;
  }

  struct Bound {
    std::string key;
    CLI::Option* option;
    std::string constant;
  };

  CLI::App* app_;
  std::string config_path_;
  std::map<std::string, std::string> store_;
  std::vector<Bound> options_;
  std::vector<std::string> required_;
};

void schema_options(Binder& b) {
  b.value("task_column", "--task-column", "Task identifier column (default task_id)");
  b.value("protected_column", "--protected-column", "Binary protected attribute column (default protected)");
  b.value("target_column", "--target-column", "Regression target column (default target)");
  b.value("label_a", "--label-a", "Protected value mapped to partition A");
}

void solver_options(Binder& b) {
  b.value("rho", "--rho", "Projection coupling penalty (default 0.001)");
  b.value("beta", "--beta", "Group-lasso weight (default 0.01)");
  b.value("gamma", "--gamma", "Inner augmented-Lagrangian penalty (default 1)");
  b.value("theta", "--theta", "Multiplier step size (default 0.01)");
  b.value("epsilon", "--epsilon", "Fairness slack on the AUC (default 0.01)");
  b.value("tau", "--tau", "Shrink search breadth (default 1e7)");
  b.value("outer_iters", "--outer-iters", "Outer NC-ADMM iterations (default 30)");
  b.value("inner_iters", "--inner-iters", "Inner sweeps per outer iteration (default 50)");
  b.value("kappa", "--kappa", "Band width convention: derived (eps*nA*nB) or printed (eps*nA^2)");
  b.toggle("fairness", "--no-fairness", "Disable the rank-sum projection", "false");
}

void common_options(Binder& b) {
  b.value("seed", "--seed", "Random seed");
  b.value("output_dir", "--output-dir", "Directory for output files (default .)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fair multi-task regression with a rank-sum fairness constraint"};
  app.require_subcommand(1);
  app.set_help_flag("--help", "Print this help message and exit");

  auto* generate_app = app.add_subcommand("generate", "Write a synthetic dataset CSV");
  generate_app->set_help_flag("--help", "Print this help message and exit");  // -h is the rows-per-task flag
  Binder generate(generate_app);
  generate.required("alpha", "--alpha", "Target AUC of the protected split (0.5 = unbiased)");
  generate.value("k", "--k", "Number of tasks (default 40)");
  generate.value("h", "--h", "Rows per task (default 25)");
  generate.value("n", "--n", "Columns including the protected indicator (default 5)");
  generate.value("sd", "--sd", "Within-group target standard deviation (default 1)");
  generate.value("mean_gap", "--mean-gap", "Override the calibrated A-B mean gap");
  generate.value("seed", "--seed", "Random seed (default 1)");
  generate.required("output", "-o,--output", "Output CSV path");

  Binder train(app.add_subcommand("train", "Fit the fair multi-task model"));
  train.required("data", "--data", "Dataset CSV");
  schema_options(train);
  solver_options(train);
  common_options(train);

  Binder evaluate(app.add_subcommand("evaluate", "Fairness and accuracy report"));
  evaluate.required("data", "--data", "Dataset CSV");
  evaluate.value("predictions", "--predictions", "predictions.csv from train; omit to score the targets alone");
  schema_options(evaluate);
  common_options(evaluate);

  Binder sweep(app.add_subcommand("sweep", "Cross-validated hyperparameter sweep"));
  sweep.required("data", "--data", "Dataset CSV");
  sweep.value("betas", "--betas", "Comma-separated beta grid (default 1e-4,...,1e4)");
  sweep.value("epsilons", "--epsilons", "Comma-separated epsilon axis (default 0.01,0.05,0.1,0.25)");
  sweep.value("folds", "--folds", "Cross-validation folds (default 10)");
  sweep.value("repeats", "--repeats", "Repetitions with varied seeds (default 1)");
  sweep.value("jobs", "--jobs", "Concurrent training jobs (default 1)");
  schema_options(sweep);
  solver_options(sweep);
  common_options(sweep);

  Binder project(app.add_subcommand("project", "Project one vector onto the rank-sum band"));
  project.value("input", "--input", "CSV with columns value,group (group A or B)");
  project.value("epsilon", "--epsilon", "Fairness slack (default 0.01)");
  project.value("kappa", "--kappa", "Band width convention: derived or printed");
  project.value("lower", "--lower", "Override the lower bound C");
  project.value("tau", "--tau", "Shrink search breadth (default 1e7)");
  project.toggle("oracle", "--oracle", "Also run the exhaustive oracle (at most 16 entries)", "true");
  project.value("fuzz", "--fuzz", "Score this many random instances against the oracle instead");
  project.value("max_size", "--max-size", "Largest fuzz instance (default 12, at most 16)");
  common_options(project);

  auto* replay = app.add_subcommand("replay", "Rerun a manifest and compare output hashes");
  std::string manifest_path, replay_dir;
  replay->add_option("--manifest", manifest_path, "manifest.json written by an earlier run")->required();
  replay->add_option("--output-dir", replay_dir, "Directory for the rerun outputs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fairrank::cli::kExitUsage;
  }

  const std::vector<std::pair<std::string, Binder*>> commands{
      {"generate", &generate}, {"train", &train}, {"evaluate", &evaluate}, {"sweep", &sweep}, {"project", &project}};
  try {
    if (replay->parsed()) {
      const auto report = fairrank::cli::replay(manifest_path, replay_dir);
      for (const auto& f : report.files) {
        std::cout << (f.match() ? "match    " : "MISMATCH ") << f.path << " " << f.actual << "\n";
      }
      return report.all_match() ? fairrank::cli::kExitOk : fairrank::cli::kExitMismatch;
    }
    for (const auto& [name, binder] : commands) {
      if (!binder->app()->parsed()) continue;
      Options opts;
      try {
        opts = binder->collect();
      } catch (const fairrank::cli::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << binder->app()->help();
        return fairrank::cli::kExitUsage;
      }
      if (name == "project" && !opts.has("input") && !opts.has("fuzz")) {
        std::cerr << "error: project needs --input or --fuzz\n\n" << binder->app()->help();
        return fairrank::cli::kExitUsage;
      }
      const auto result = fairrank::cli::run_command(name, opts);
      std::cout << result.summary;
      if (!result.summary.empty() && result.summary.back() != '\n') std::cout << '\n';
      std::cout << "manifest: " << result.manifest_path.string() << "\n";
      return fairrank::cli::kExitOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return fairrank::cli::exit_code_for(e);
  }
  return fairrank::cli::kExitUsage;
}
