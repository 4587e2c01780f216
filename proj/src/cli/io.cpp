#include "cli/io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "fairrank/error.hpp"
#include "fairrank/projection.hpp"

namespace fairrank::cli {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

double parse(const std::string& text, const std::filesystem::path& path, std::size_t line) {
  double out = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw DataError(path.string() + ", line " + std::to_string(line) + ": cannot parse '" + text + "' as a number");
  }
  return out;
}

// Header name -> column position, requiring every name in `needed`.
std::map<std::string, std::size_t> header_map(const std::string& header, const std::vector<std::string>& needed,
                                              const std::filesystem::path& path) {
  std::map<std::string, std::size_t> pos;
  const auto cells = split(header);
  for (std::size_t i = 0; i < cells.size(); ++i) pos[cells[i]] = i;
  for (const auto& n : needed) {
    if (!pos.count(n)) throw DataError(path.string() + ": missing column '" + n + "'");
  }
  return pos;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::string fnv1a_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fnv1a_file(const std::filesystem::path& path) { return fnv1a_hex(read_text(path)); }

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw DataError("write failed for '" + path.string() + "'");
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string weights_csv(const TaskDataset& data, const Eigen::MatrixXd& weights) {
  std::ostringstream os;
  os << "task_id";
  for (std::size_t c = 0; c < data.n; ++c) {
    os << ',' << (c < data.feature_names.size() ? data.feature_names[c] : "x" + std::to_string(c));
  }
  os << '\n';
  for (std::size_t j = 0; j < data.k; ++j) {
    os << data.task_ids[j];
    for (std::size_t c = 0; c < data.n; ++c) {
      os << ',' << format_double(weights(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)));
    }
    os << '\n';
  }
  return os.str();
}

std::string predictions_csv(const std::vector<PredictionRow>& rows) {
  std::ostringstream os;
  os << "index,task_id,protected,target,prediction,projected,demoted\n";
  for (const auto& r : rows) {
    os << r.index << ',' << r.task_id << ',' << r.protected_label << ',' << format_double(r.target) << ','
       << format_double(r.prediction) << ',' << format_double(r.projected) << ',' << (r.demoted ? 1 : 0) << '\n';
  }
  return os.str();
}

std::vector<PredictionRow> read_predictions(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty predictions file");
  const auto pos = header_map(line, {"index", "task_id", "prediction"}, path);
  const bool has_projected = pos.count("projected") != 0;
  const bool has_demoted = pos.count("demoted") != 0;
  std::vector<PredictionRow> rows;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() < pos.size()) throw DataError(path.string() + ", line " + std::to_string(number) + ": too few cells");
    PredictionRow r;
    r.index = static_cast<std::size_t>(parse(cells[pos.at("index")], path, number));
    r.task_id = cells[pos.at("task_id")];
    r.prediction = parse(cells[pos.at("prediction")], path, number);
    r.projected = has_projected ? parse(cells[pos.at("projected")], path, number) : r.prediction;
    r.demoted = has_demoted && cells[pos.at("demoted")] == "1";
    if (pos.count("target")) r.target = parse(cells[pos.at("target")], path, number);
    if (pos.count("protected")) r.protected_label = cells[pos.at("protected")];
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string trace_csv(const SolverTrace& trace) {
  std::ostringstream os;
  os << "iteration,objective,primal_residual,feasible,r_a,auc,demoted,route\n";
  for (const auto& t : trace) {
    os << t.iteration << ',' << format_double(t.objective) << ',' << format_double(t.primal_residual) << ','
       << (t.feasible ? 1 : 0) << ',' << format_double(t.r_a) << ',' << format_double(t.auc) << ',' << t.demoted
       << ',' << to_string(t.route) << '\n';
  }
  return os.str();
}

LabelledVector read_labelled_vector(const std::filesystem::path& path) {
  std::istringstream in(read_text(path));
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty vector file");
  const auto pos = header_map(line, {"value", "group"}, path);
  LabelledVector v;
  std::size_t number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    if (cells.size() < pos.size()) throw DataError(path.string() + ", line " + std::to_string(number) + ": too few cells");
    const std::string& g = cells[pos.at("group")];
    if (g != "A" && g != "B") {
      throw DataError(path.string() + ", line " + std::to_string(number) + ": group must be A or B, got '" + g + "'");
    }
    v.values.push_back(parse(cells[pos.at("value")], path, number));
    v.groups.push_back(g == "A" ? Group::A : Group::B);
  }
  return v;
}

std::string labelled_vector_csv(const LabelledVector& v) {
  std::ostringstream os;
  os << "value,group\n";
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    os << format_double(v.values[i]) << ',' << (v.groups[i] == Group::A ? 'A' : 'B') << '\n';
  }
  return os.str();
}

}  // namespace fairrank::cli
