#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fairrank/dataset.hpp"
#include "fairrank/ncadmm.hpp"

namespace fairrank::cli {

/// Shortest round-trip decimal representation.
std::string format_double(double x);

/// 64-bit FNV-1a of a file's bytes, as 16 lowercase hex digits.
std::string fnv1a_file(const std::filesystem::path& path);
std::string fnv1a_hex(std::string_view bytes);

/// Writes text atomically enough for our purposes: truncate and write.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Task id followed by one column per feature.
std::string weights_csv(const TaskDataset& data, const Eigen::MatrixXd& weights);

struct PredictionRow {
  std::size_t index = 0;
  std::string task_id;
  std::string protected_label;
  double target = 0.0;
  double prediction = 0.0;
  double projected = 0.0;
  bool demoted = false;
};

std::string predictions_csv(const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> read_predictions(const std::filesystem::path& path);

std::string trace_csv(const SolverTrace& trace);

/// Vector file for the project subcommand: columns `value,group`, where group
/// is A or B.
struct LabelledVector {
  std::vector<double> values;
  std::vector<Group> groups;
};

LabelledVector read_labelled_vector(const std::filesystem::path& path);
std::string labelled_vector_csv(const LabelledVector& v);

}  // namespace fairrank::cli
