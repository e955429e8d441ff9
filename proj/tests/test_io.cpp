#include "iarpm/errors.hpp"
#include "iarpm/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>

using namespace iarpm;

TEST(Io, ParsesMixedSeparatorsAndComments) {
  std::istringstream in("# header\n1 2\n\n3,4\n  5;\t6\n# tail\n");
  const PointSet p = parse_points(in);
  ASSERT_EQ(p.size(), 3);
  EXPECT_EQ(p.dim(), 2);
  EXPECT_EQ(p.matrix()(2, 1), 6.0);
}

TEST(Io, ReportsLineOfBadToken) {
  std::istringstream in("1 2\n3 x\n");
  try {
    parse_points(in);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInput);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Io, RejectsRaggedRows) {
  std::istringstream in("1 2\n3 4 5\n");
  EXPECT_THROW(parse_points(in), Error);
}

TEST(Io, RejectsEmptyInput) {
  std::istringstream in("# nothing\n");
  EXPECT_THROW(parse_points(in), Error);
}

TEST(Io, PointFileRoundTripIsExact) {
  Eigen::MatrixXd m(2, 3);
  m << 0.1, 1.0 / 3.0, -2e-17, 1e10, 7.0, -0.25;
  const auto path = std::filesystem::temp_directory_path() / "iarpm_io_roundtrip.txt";
  write_point_file(path.string(), PointSet(m));
  const PointSet back = read_point_file(path.string());
  EXPECT_TRUE((back.matrix().array() == m.array()).all());
  std::filesystem::remove(path);
}

TEST(Io, MissingFile) {
  EXPECT_THROW(read_point_file("/nonexistent/points.txt"), Error);
}

TEST(Io, ParsesMatrix) {
  std::istringstream in("1,2,3\n4,5,6\n");
  const Eigen::MatrixXd m = parse_matrix(in);
  EXPECT_EQ(m.rows(), 2);
  EXPECT_EQ(m.cols(), 3);
  EXPECT_EQ(m(1, 2), 6.0);
  std::istringstream bad("1,2\n3,abc\n");
  EXPECT_THROW(parse_matrix(bad), Error);
}
