#include "gpsfilt/trajectory_io.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include "gpsfilt/errors.hpp"

namespace gpsfilt {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_field(const std::string& field, long line_no) {
  const std::string f = trim(field);
  double value = 0.0;
  const char* first = f.data();
  const char* last = f.data() + f.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last)
    throw ParseError("csv: cannot parse number '" + f + "'", line_no);
  if (!std::isfinite(value)) throw ParseError("csv: non-finite value", line_no);
  return value;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

Trajectoryd load_csv(std::istream& in) {
  std::string line;
  long line_no = 0;

  if (!std::getline(in, line)) throw ParseError("csv: empty input", 1);
  ++line_no;
  if (trim(line) != "t,truth,measured")
    throw ParseError("csv: expected header 't,truth,measured'", line_no);

  std::vector<double> t, truth, measured;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_row(line);
    if (fields.size() != 3)
      throw ParseError("csv: expected 3 columns, got " + std::to_string(fields.size()), line_no);
    t.push_back(parse_field(fields[0], line_no));
    truth.push_back(parse_field(fields[1], line_no));
    measured.push_back(parse_field(fields[2], line_no));
  }
  if (t.empty()) throw ParseError("csv: no samples", line_no);
  if (t.size() < 2) throw ParseError("csv: need at least 2 samples", line_no);

  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw FormatError("csv: timestamps must be strictly increasing");
  const double tol = 1e-9 * dt;
  for (std::size_t k = 1; k < t.size(); ++k) {
    if (std::abs((t[k] - t[k - 1]) - dt) > tol)
      throw FormatError("csv: non-uniform sample spacing at row " + std::to_string(k + 1));
  }

  Trajectoryd traj;
  traj.dt = dt;
  traj.truth = Eigen::Map<const VectorX<double>>(truth.data(), static_cast<Index>(truth.size()));
  traj.measured =
      Eigen::Map<const VectorX<double>>(measured.data(), static_cast<Index>(measured.size()));
  traj.validate();
  return traj;
}

Trajectoryd load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "' for reading");
  return load_csv(in);
}

void save_csv(const Trajectoryd& traj, std::ostream& out) {
  traj.validate();
  out << "t,truth,measured\n";
  char row[128];
  for (Index k = 0; k < traj.size(); ++k) {
    std::snprintf(row, sizeof(row), "%.17g,%.17g,%.17g\n", static_cast<double>(k) * traj.dt,
                  traj.truth[k], traj.measured[k]);
    out << row;
  }
  if (!out) throw std::runtime_error("csv: write failure");
}

void save_csv(const Trajectoryd& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  save_csv(traj, out);
}

void write_error_series(const VectorX<double>& estimate, const VectorX<double>& truth,
                        Index first_index, std::ostream& out) {
  if (estimate.size() != truth.size())
    throw ParameterError("error series: length mismatch");
  out << "k,abs_error\n";
  char row[64];
  for (Index i = 0; i < estimate.size(); ++i) {
    std::snprintf(row, sizeof(row), "%lld,%.17g\n",
                  static_cast<long long>(first_index + i), std::abs(estimate[i] - truth[i]));
    out << row;
  }
  if (!out) throw std::runtime_error("error series: write failure");
}

void write_error_series(const VectorX<double>& estimate, const VectorX<double>& truth,
                        Index first_index, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  write_error_series(estimate, truth, first_index, out);
}

}  // namespace gpsfilt
