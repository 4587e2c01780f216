#include "fairrank/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>

#include <boost/math/distributions/normal.hpp>

#include "fairrank/error.hpp"

namespace fairrank {

namespace {

// Share of the within-group target variance explained by the features.
constexpr double kExplainedShare = 0.5;

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell.push_back('"');
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell.push_back(c);
    }
  }
  if (!cell.empty() && cell.back() == '\r') cell.pop_back();
  cells.push_back(std::move(cell));
  return cells;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& raw, std::size_t line, const std::string& column) {
  std::string s = trim(raw);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw DataError("line " + std::to_string(line) + ", column '" + column +
                    "': cannot parse '" + raw + "' as a number");
  }
  if (!std::isfinite(value)) {
    throw DataError("line " + std::to_string(line) + ", column '" + column +
                    "': non-finite value '" + raw + "'");
  }
  return value;
}

std::string format_real(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

std::size_t TaskDataset::count(Group g) const {
  return static_cast<std::size_t>(std::count(groups.begin(), groups.end(), g));
}

Eigen::RowVectorXd TaskDataset::row(std::size_t flat) const {
  return features[flat / h].row(static_cast<Eigen::Index>(flat % h));
}

void TaskDataset::validate() const {
  if (k == 0 || h == 0 || n == 0) throw DataError("dataset dimensions must be positive");
  if (features.size() != k) throw DataError("expected one feature matrix per task");
  for (std::size_t j = 0; j < k; ++j) {
    const auto& x = features[j];
    if (static_cast<std::size_t>(x.rows()) != h || static_cast<std::size_t>(x.cols()) != n) {
      throw DataError("task " + std::to_string(j) + " feature matrix has wrong shape");
    }
    if (!x.allFinite()) throw DataError("task " + std::to_string(j) + " has non-finite features");
  }
  if (static_cast<std::size_t>(targets.size()) != size() || groups.size() != size()) {
    throw DataError("targets/groups length must equal k*h");
  }
  if (!targets.allFinite()) throw DataError("non-finite target value");
  if (task_ids.size() != k) throw DataError("expected one task id per task");
}

Eigen::VectorXd StandardizationParams::inverse_targets(const Eigen::VectorXd& z) const {
  return (z.array() * target_sd + target_mean).matrix();
}

Standardized standardize(const TaskDataset& data) {
  Standardized out{data, {}};
  const std::size_t n = data.n;
  const double count = static_cast<double>(data.size());
  auto& p = out.params;
  p.mean.assign(n, 0.0);
  p.sd.assign(n, 1.0);
  p.constant.assign(n, false);

  auto is_constant = [](double sd, double mean) { return sd <= 1e-12 * std::max(1.0, std::abs(mean)); };

  for (std::size_t c = 1; c < n; ++c) {
    double sum = 0.0;
    for (const auto& x : data.features) sum += x.col(static_cast<Eigen::Index>(c)).sum();
    const double mean = sum / count;
    double ss = 0.0;
    for (const auto& x : data.features) {
      ss += (x.col(static_cast<Eigen::Index>(c)).array() - mean).square().sum();
    }
    const double sd = std::sqrt(ss / count);
    p.mean[c] = mean;
    if (is_constant(sd, mean)) {
      p.constant[c] = true;
      p.sd[c] = 1.0;
      for (auto& x : out.data.features) x.col(static_cast<Eigen::Index>(c)).setZero();
    } else {
      p.sd[c] = sd;
      for (auto& x : out.data.features) {
        x.col(static_cast<Eigen::Index>(c)) = (x.col(static_cast<Eigen::Index>(c)).array() - mean) / sd;
      }
    }
  }

  const double tmean = data.targets.mean();
  const double tsd = std::sqrt((data.targets.array() - tmean).square().sum() / count);
  p.target_mean = tmean;
  if (is_constant(tsd, tmean)) {
    p.target_constant = true;
    p.target_sd = 1.0;
    out.data.targets.setZero();
  } else {
    p.target_sd = tsd;
    out.data.targets = (data.targets.array() - tmean) / tsd;
  }
  return out;
}

TaskDataset load_csv(const std::filesystem::path& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) throw DataError("'" + path.string() + "' is empty (header row required)");
  auto header = split_csv_line(line);
  for (auto& h : header) h = trim(h);

  auto find_col = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw DataError("header lacks required column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t task_col = find_col(schema.task_column);
  const std::size_t prot_col = find_col(schema.protected_column);
  const std::size_t target_col = find_col(schema.target_column);
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != task_col && c != prot_col && c != target_col) feature_cols.push_back(c);
  }

  struct RawRow {
    std::string protected_value;
    double target;
    std::vector<double> features;
  };
  std::vector<std::string> task_order;
  std::unordered_map<std::string, std::vector<RawRow>> rows_by_task;
  std::set<std::string> protected_values;

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line) == "\r") continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                      " cells, found " + std::to_string(cells.size()));
    }
    RawRow r;
    r.protected_value = trim(cells[prot_col]);
    if (r.protected_value.empty()) {
      throw DataError("line " + std::to_string(line_no) + ", column '" + schema.protected_column + "': empty value");
    }
    protected_values.insert(r.protected_value);
    if (protected_values.size() > 2) {
      throw DataError("line " + std::to_string(line_no) + ", column '" + schema.protected_column +
                      "': protected column not binary (third value '" + r.protected_value + "')");
    }
    r.target = parse_real(cells[target_col], line_no, header[target_col]);
    r.features.reserve(feature_cols.size());
    for (auto c : feature_cols) r.features.push_back(parse_real(cells[c], line_no, header[c]));

    std::string task = trim(cells[task_col]);
    auto [it, inserted] = rows_by_task.try_emplace(task);
    if (inserted) task_order.push_back(task);
    it->second.push_back(std::move(r));
  }
  if (task_order.empty()) throw DataError("'" + path.string() + "' has no data rows");
  if (protected_values.size() != 2) throw DataError("protected column not binary (only one distinct value)");

  TaskDataset d;
  if (schema.label_a) {
    if (!protected_values.contains(*schema.label_a)) {
      throw DataError("label '" + *schema.label_a + "' does not occur in the protected column");
    }
    d.label_a = *schema.label_a;
    d.label_b = *protected_values.begin() == d.label_a ? *protected_values.rbegin() : *protected_values.begin();
  } else {
    d.label_a = *protected_values.begin();
    d.label_b = *protected_values.rbegin();
  }

  d.k = task_order.size();
  d.h = rows_by_task[task_order.front()].size();
  d.n = feature_cols.size() + 1;
  for (const auto& t : task_order) {
    if (rows_by_task[t].size() != d.h) {
      throw DataError("ragged task sizes: task '" + t + "' has " + std::to_string(rows_by_task[t].size()) +
                      " rows, task '" + task_order.front() + "' has " + std::to_string(d.h));
    }
  }
  d.feature_names.push_back(schema.protected_column);
  for (auto c : feature_cols) d.feature_names.push_back(header[c]);
  d.task_ids = task_order;
  d.targets.resize(static_cast<Eigen::Index>(d.size()));
  d.groups.resize(d.size());
  d.features.reserve(d.k);
  for (std::size_t j = 0; j < d.k; ++j) {
    const auto& rows = rows_by_task[task_order[j]];
    Eigen::MatrixXd x(static_cast<Eigen::Index>(d.h), static_cast<Eigen::Index>(d.n));
    for (std::size_t i = 0; i < d.h; ++i) {
      const auto& r = rows[i];
      const Group g = r.protected_value == d.label_a ? Group::A : Group::B;
      const auto flat = d.flat_index(j, i);
      d.groups[flat] = g;
      d.targets[static_cast<Eigen::Index>(flat)] = r.target;
      const auto ri = static_cast<Eigen::Index>(i);
      x(ri, 0) = g == Group::A ? 1.0 : 0.0;
      for (std::size_t c = 0; c < r.features.size(); ++c) x(ri, static_cast<Eigen::Index>(c + 1)) = r.features[c];
    }
    d.features.push_back(std::move(x));
  }
  d.validate();
  return d;
}

void write_csv(const TaskDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << "task_id,protected,target";
  for (std::size_t c = 1; c < data.n; ++c) {
    out << ',' << (c < data.feature_names.size() ? data.feature_names[c] : "x" + std::to_string(c));
  }
  out << '\n';
  for (std::size_t j = 0; j < data.k; ++j) {
    for (std::size_t i = 0; i < data.h; ++i) {
      const auto flat = data.flat_index(j, i);
      out << data.task_ids[j] << ',' << (data.groups[flat] == Group::A ? data.label_a : data.label_b) << ','
          << format_real(data.targets[static_cast<Eigen::Index>(flat)]);
      for (std::size_t c = 1; c < data.n; ++c) {
        out << ',' << format_real(data.features[j](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
      }
      out << '\n';
    }
  }
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

double calibrated_mean_gap(double alpha, double sd) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
  boost::math::normal_distribution<double> unit;
  return sd * std::sqrt(2.0) * boost::math::quantile(unit, alpha);
}

TaskDataset generate_synthetic(const SyntheticSpec& spec) {
  if (!spec.mean_gap && !(spec.alpha > 0.5 && spec.alpha < 1.0)) {
    throw ConfigError("alpha must lie in (0.5, 1), got " + format_real(spec.alpha));
  }
  if (spec.k == 0 || spec.h == 0 || spec.n == 0) throw ConfigError("k, h and n must be positive");
  if (!(spec.sd > 0.0)) throw ConfigError("sd must be positive");

  const double gap = spec.mean_gap ? *spec.mean_gap : calibrated_mean_gap(spec.alpha, spec.sd);
  const double mu_a = 0.5 * gap;
  const double mu_b = -0.5 * gap;
  const std::size_t explanatory = spec.n - 1;
  const double share = explanatory > 0 ? kExplainedShare : 0.0;
  const double feature_weight = std::sqrt(share);
  const double noise_weight = std::sqrt(1.0 - share);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);

  TaskDataset d;
  d.k = spec.k;
  d.h = spec.h;
  d.n = spec.n;
  d.feature_names.push_back("protected");
  for (std::size_t c = 1; c < spec.n; ++c) d.feature_names.push_back("x" + std::to_string(c));
  d.targets.resize(static_cast<Eigen::Index>(d.size()));
  d.groups.resize(d.size());

  for (std::size_t j = 0; j < spec.k; ++j) {
    d.task_ids.push_back("t" + std::to_string(j));
    Eigen::VectorXd loading(static_cast<Eigen::Index>(explanatory));
    for (std::size_t c = 0; c < explanatory; ++c) loading[static_cast<Eigen::Index>(c)] = normal(rng);
    if (explanatory > 0) {
      const double norm = loading.norm();
      if (norm > 0.0) loading /= norm;
    }
    Eigen::MatrixXd x(static_cast<Eigen::Index>(spec.h), static_cast<Eigen::Index>(spec.n));
    for (std::size_t i = 0; i < spec.h; ++i) {
      const auto ri = static_cast<Eigen::Index>(i);
      const Group g = coin(rng) ? Group::A : Group::B;
      x(ri, 0) = g == Group::A ? 1.0 : 0.0;
      double signal = 0.0;
      for (std::size_t c = 0; c < explanatory; ++c) {
        const double v = normal(rng);
        x(ri, static_cast<Eigen::Index>(c + 1)) = v;
        signal += loading[static_cast<Eigen::Index>(c)] * v;
      }
      const double noise = normal(rng);
      const auto flat = d.flat_index(j, i);
      d.groups[flat] = g;
      d.targets[static_cast<Eigen::Index>(flat)] =
          (g == Group::A ? mu_a : mu_b) + spec.sd * (feature_weight * signal + noise_weight * noise);
    }
    d.features.push_back(std::move(x));
  }
  d.validate();
  return d;
}

std::vector<Fold> split_folds(const TaskDataset& data, std::size_t folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("folds must be at least 2");
  if (folds > data.h) {
    throw ConfigError("folds (" + std::to_string(folds) + ") exceeds rows per task (" + std::to_string(data.h) + ")");
  }
  std::mt19937_64 rng(seed);
  std::vector<Fold> out(folds);
  std::vector<std::size_t> order(data.h);
  for (std::size_t j = 0; j < data.k; ++j) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t pos = 0; pos < data.h; ++pos) {
      const auto flat = data.flat_index(j, order[pos]);
      for (std::size_t f = 0; f < folds; ++f) {
        (f == pos % folds ? out[f].validation : out[f].train).push_back(flat);
      }
    }
  }
  for (std::size_t f = 0; f < folds; ++f) {
    auto& fold = out[f];
    std::sort(fold.train.begin(), fold.train.end());
    std::sort(fold.validation.begin(), fold.validation.end());
    bool has_a = false, has_b = false;
    for (auto i : fold.train) (data.groups[i] == Group::A ? has_a : has_b) = true;
    if (!has_a || !has_b) {
      throw DataError("fold " + std::to_string(f) + " training set lacks partition " + (has_a ? "B" : "A"));
    }
  }
  return out;
}

TaskDataset subset(const TaskDataset& data, std::span<const std::size_t> flat_indices) {
  std::vector<std::vector<std::size_t>> rows(data.k);
  for (auto flat : flat_indices) {
    if (flat >= data.size()) throw DataError("subset index out of range");
    rows[flat / data.h].push_back(flat % data.h);
  }
  const std::size_t h = rows.front().size();
  for (std::size_t j = 0; j < data.k; ++j) {
    if (rows[j].size() != h) throw DataError("subset must keep the same number of rows in every task");
    std::sort(rows[j].begin(), rows[j].end());
  }
  TaskDataset d;
  d.k = data.k;
  d.h = h;
  d.n = data.n;
  d.task_ids = data.task_ids;
  d.feature_names = data.feature_names;
  d.label_a = data.label_a;
  d.label_b = data.label_b;
  d.targets.resize(static_cast<Eigen::Index>(d.size()));
  d.groups.resize(d.size());
  for (std::size_t j = 0; j < d.k; ++j) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(d.n));
    for (std::size_t i = 0; i < h; ++i) {
      const auto src = data.flat_index(j, rows[j][i]);
      x.row(static_cast<Eigen::Index>(i)) = data.features[j].row(static_cast<Eigen::Index>(rows[j][i]));
      d.targets[static_cast<Eigen::Index>(d.flat_index(j, i))] = data.targets[static_cast<Eigen::Index>(src)];
      d.groups[d.flat_index(j, i)] = data.groups[src];
    }
    d.features.push_back(std::move(x));
  }
  return d;
}

}  // namespace fairrank
