#pragma once

// Canonical number rendering and small CSV helpers shared by the file formats.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dri {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Shortest decimal string that round-trips the double exactly. Used for every
// number we emit (JSON, CSV, model serialization) so re-runs are byte-identical
// and the A3 nesting check can compare rendered rows.
inline std::string render_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc()) throw std::runtime_error("bad number: '" + s + "'");
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

// Dataset CSV: header c1..cn, one sample row per line.
inline Matrix read_data_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty data file " + path);
  const std::size_t n = split_csv_line(line).size();
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != n) throw std::runtime_error("ragged row in " + path);
    for (auto& c : cells) values.push_back(parse_double(c));
    ++rows;
  }
  Matrix m(rows, n);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t j = 0; j < n; ++j) m(r, j) = values[r * n + j];
  return m;
}

inline void write_data_csv(const std::string& path, const Matrix& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (int j = 0; j < samples.cols(); ++j) out << (j ? "," : "") << "c" << (j + 1);
  out << "\n";
  for (int r = 0; r < samples.rows(); ++r) {
    for (int j = 0; j < samples.cols(); ++j)
      out << (j ? "," : "") << render_double(samples(r, j));
    out << "\n";
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

}  // namespace dri
