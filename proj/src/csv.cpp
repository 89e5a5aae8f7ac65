#include "ngmc/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ngmc/errors.hpp"

namespace ngmc {
namespace {

// All lines of the file, CR-stripped, with trailing blank lines removed.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string::size_type start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

double parse_cell(const std::string& raw, const std::string& path, int row,
                  int col) {
  const char* b = raw.data();
  const char* e = raw.data() + raw.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
  double v = 0.0;
  const auto res = std::from_chars(b, e, v);
  const bool parsed = b < e && res.ec == std::errc() && res.ptr == e;
  if (!parsed || !std::isfinite(v)) {
    throw ConfigError(path + ": non-numeric value \"" + raw + "\" at row " +
                      std::to_string(row) + ", column " + std::to_string(col));
  }
  return v;
}

}  // namespace

Eigen::MatrixXd read_csv_matrix(const std::string& path, bool skip_header) {
  const std::vector<std::string> lines = read_lines(path);
  const std::size_t first = skip_header ? 1 : 0;
  if (lines.size() <= first) throw ConfigError(path + ": no data rows");

  const std::size_t rows = lines.size() - first;
  std::size_t cols = 0;
  Eigen::MatrixXd m;
  for (std::size_t i = 0; i < rows; ++i) {
    const int file_row = static_cast<int>(first + i + 1);
    const std::vector<std::string> fields = split_fields(lines[first + i]);
    if (i == 0) {
      cols = fields.size();
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (fields.size() != cols) {
      throw ConfigError(path + ": row " + std::to_string(file_row) + " has " +
                        std::to_string(fields.size()) + " fields, expected " +
                        std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          parse_cell(fields[j], path, file_row, static_cast<int>(j + 1));
    }
  }
  return m;
}

Dataset load_csv(const std::string& path_x, const std::string& path_y,
                 bool skip_header, std::vector<std::string>* warnings) {
  const Eigen::MatrixXd x = read_csv_matrix(path_x, skip_header);
  const Eigen::MatrixXd y = read_csv_matrix(path_y, skip_header);
  if (y.cols() != 1) {
    throw ConfigError(path_y + ": the response must be a single column, found " +
                      std::to_string(y.cols()));
  }
  if (x.rows() != y.rows()) {
    throw ConfigError("dimension mismatch: " + path_x + " has " +
                      std::to_string(x.rows()) + " rows but " + path_y +
                      " has " + std::to_string(y.rows()));
  }
  if (warnings) {
    const bool binary =
        ((x.array() == 0.0) || (x.array() == 1.0)).all();
    if (binary) {
      warnings->push_back(path_x +
                          ": every design entry is 0 or 1 (binary predictors)");
    }
  }
  return Dataset(x, y.col(0));
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw ConfigError(path + ": cannot open file for writing");
  char buf[64];
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
      if (j) out << ',';
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw ConfigError(path + ": write failed");
}

}  // namespace ngmc
