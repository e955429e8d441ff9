#pragma once

#include "iarpm/transform_models.hpp"

#include <Eigen/Core>

#include <istream>
#include <string>

namespace iarpm {

/// One point per line; coordinates separated by whitespace and/or commas.
/// Blank lines and lines starting with '#' are skipped. The first data line
/// fixes the dimension. Throws Error(kInput) with the offending line number.
PointSet parse_points(std::istream& in);
PointSet read_point_file(const std::string& path);
void write_point_file(const std::string& path, const PointSet& points);

/// Rectangular numeric CSV (comma or whitespace separated).
Eigen::MatrixXd parse_matrix(std::istream& in);
Eigen::MatrixXd read_matrix_file(const std::string& path);

}  // namespace iarpm
