#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fairrank {

/// Binary protected partition of an instance.
enum class Group : std::uint8_t { A = 0, B = 1 };

inline constexpr Group other(Group g) { return g == Group::A ? Group::B : Group::A; }

/// Multi-task regression corpus: k tasks with h rows each and n features.
///
/// Column 0 of every task matrix is the protected indicator (1 for A, 0 for
/// B); the remaining n-1 columns are explanatory features. Targets and labels
/// are stored flat in task-major, row-minor order, so instance (task, row)
/// lives at flat index task * h + row.
struct TaskDataset {
  std::size_t k = 0;
  std::size_t h = 0;
  std::size_t n = 0;
  std::vector<Eigen::MatrixXd> features;  // k matrices of shape h x n
  Eigen::VectorXd targets;                // length k*h
  std::vector<Group> groups;              // length k*h
  std::vector<std::string> task_ids;      // length k
  std::vector<std::string> feature_names; // length n, [0] is the protected column
  std::string label_a = "A";
  std::string label_b = "B";

  std::size_t size() const { return k * h; }
  std::size_t flat_index(std::size_t task, std::size_t row) const { return task * h + row; }
  std::size_t count(Group g) const;

  /// Throws DataError if any structural invariant is broken.
  void validate() const;

  /// Feature row of a flat instance.
  Eigen::RowVectorXd row(std::size_t flat) const;

  /// Slice of a flat vector belonging to one task.
  template <typename Vec>
  auto task_slice(Vec& v, std::size_t task) const {
    return v.segment(static_cast<Eigen::Index>(task * h), static_cast<Eigen::Index>(h));
  }
};

/// Per-column scaling used by standardize(). Column 0 (protected) is never scaled.
struct StandardizationParams {
  std::vector<double> mean;
  std::vector<double> sd;
  std::vector<bool> constant;
  double target_mean = 0.0;
  double target_sd = 1.0;
  bool target_constant = false;

  double inverse_target(double z) const { return z * target_sd + target_mean; }
  double forward_target(double y) const {
    return target_constant ? 0.0 : (y - target_mean) / target_sd;
  }
  Eigen::VectorXd inverse_targets(const Eigen::VectorXd& z) const;
};

struct Standardized {
  TaskDataset data;
  StandardizationParams params;
};

/// Pooled zero-mean / unit-variance scaling (population sd) of features and targets.
Standardized standardize(const TaskDataset& data);

/// Column mapping for CSV ingestion.
struct CsvSchema {
  std::string task_column = "task_id";
  std::string protected_column = "protected";
  std::string target_column = "target";
  /// Value mapped to partition A; defaults to the lexicographically smaller one.
  std::optional<std::string> label_a;
};

TaskDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema = {});

/// Writes the dataset in the ingestion format, rows in flat order.
void write_csv(const TaskDataset& data, const std::filesystem::path& path);

struct SyntheticSpec {
  double alpha = 0.9;
  std::size_t k = 40;
  std::size_t h = 25;
  std::size_t n = 5;
  /// Overrides the alpha-calibrated gap between the two group means.
  std::optional<double> mean_gap;
  double sd = 1.0;
  std::uint64_t seed = 1;
};

/// Mean gap that yields an expected AUC of alpha for two normals sharing sd.
double calibrated_mean_gap(double alpha, double sd);

TaskDataset generate_synthetic(const SyntheticSpec& spec);

struct Fold {
  std::vector<std::size_t> train;       // flat indices, ascending
  std::vector<std::size_t> validation;  // flat indices, ascending
};

/// Row-wise K-fold split inside every task; each fold keeps all k tasks.
std::vector<Fold> split_folds(const TaskDataset& data, std::size_t folds, std::uint64_t seed);

/// Sub-dataset made of the given flat indices. Every task must keep the same row count.
TaskDataset subset(const TaskDataset& data, std::span<const std::size_t> flat_indices);

}  // namespace fairrank
