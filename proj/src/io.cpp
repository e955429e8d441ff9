#include "iarpm/io.hpp"

#include "iarpm/errors.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <vector>

namespace iarpm {

namespace {

std::vector<std::vector<double>> parse_rows(std::istream& in, bool allow_comments) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    if (allow_comments && line[first] == '#') continue;
    for (char& c : line) {
      if (c == ',' || c == ';' || c == '\t' || c == '\r') c = ' ';
    }
    std::istringstream tokens(line);
    std::vector<double> row;
    std::string token;
    while (tokens >> token) {
      errno = 0;
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0' || errno == ERANGE) {
        throw Error(ErrorCode::kInput, "line " + std::to_string(line_no) +
                                           ": not a number: '" + token + "'");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::kInput, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(rows.front().size()) +
                                         " values, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInput, "cannot open '" + path + "'");
  return in;
}

}  // namespace

PointSet parse_points(std::istream& in) {
  return PointSet::from_rows(parse_rows(in, true));
}

PointSet read_point_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return parse_points(in);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInput, path + ": " + e.what());
  }
}

void write_point_file(const std::string& path, const PointSet& points) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kInput, "cannot write '" + path + "'");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (int i = 0; i < points.size(); ++i) {
    for (int c = 0; c < points.dim(); ++c) {
      out << (c ? " " : "") << points.matrix()(i, c);
    }
    out << '\n';
  }
}

Eigen::MatrixXd parse_matrix(std::istream& in) {
  const auto rows = parse_rows(in, true);
  if (rows.empty() || rows.front().empty()) {
    throw Error(ErrorCode::kInput, "matrix is empty");
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  if (!m.allFinite()) throw Error(ErrorCode::kInput, "matrix entries must be finite");
  return m;
}

Eigen::MatrixXd read_matrix_file(const std::string& path) {
  auto in = open_input(path);
  try {
    return parse_matrix(in);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInput, path + ": " + e.what());
  }
}

}  // namespace iarpm
