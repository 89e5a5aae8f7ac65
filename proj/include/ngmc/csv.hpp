#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "ngmc/model.hpp"

namespace ngmc {

// Reads a rectangular comma-delimited numeric file. skip_header drops the
// first line. ConfigError on unreadable files, ragged rows, or non-numeric
// cells, each reported with its 1-based file line and column.
Eigen::MatrixXd read_csv_matrix(const std::string& path,
                                bool skip_header = false);

// Loads the design matrix from path_x and the single-column response from
// path_y. ConfigError on parse failures or a row-count mismatch. Non-fatal
// observations (an all-0/1 design, say) are appended to *warnings when given.
Dataset load_csv(const std::string& path_x, const std::string& path_y,
                 bool skip_header = false,
                 std::vector<std::string>* warnings = nullptr);

// Writes a matrix as comma-delimited text with round-trip precision.
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m);

}  // namespace ngmc
