#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iarpm {

/// Transformation families that are linear in their parameters,
/// T(x | phi) = J(x) phi.
enum class ModelKind {
  kSimilarity2d,     // phi = (a, b, tx, ty): [a -b; b a] x + t
  kAffine2d,         // phi = (a11, a12, a21, a22, tx, ty)
  kScaleTranslate3d, // phi = (sx, sy, sz, tx, ty, tz)
  kZrotScale3d,      // phi = (a, b, sz, tx, ty, tz): rotation+scale in xy
};

int param_count(ModelKind kind);
int point_dim(ModelKind kind);

/// Canonical CLI spelling, e.g. "similarity2d" or "scale-translate3d".
std::string_view to_string(ModelKind kind);
/// Accepts both the dashed and the underscore-free spellings.
std::optional<ModelKind> parse_model_kind(std::string_view name);

/// Ordered set of n points of dimension 2 or 3, stored one point per row.
class PointSet {
 public:
  PointSet() = default;
  /// Throws Error(kInput) on empty input, bad dimension or non-finite values.
  explicit PointSet(Eigen::MatrixXd points);

  static PointSet from_rows(const std::vector<std::vector<double>>& rows);

  int size() const { return static_cast<int>(points_.rows()); }
  int dim() const { return static_cast<int>(points_.cols()); }
  Eigen::VectorXd point(int i) const { return points_.row(i).transpose(); }
  const Eigen::MatrixXd& matrix() const { return points_; }

 private:
  Eigen::MatrixXd points_;
};

/// One matched (model index, scene index) pair, both 0-based.
struct Match {
  int model = 0;
  int scene = 0;

  friend bool operator==(const Match&, const Match&) = default;
  friend auto operator<=>(const Match&, const Match&) = default;
};

/// A vertex of the partial-assignment polytope: exactly n_p matches with
/// distinct model and scene indices.
struct CorrespondenceVector {
  std::vector<Match> pairs;

  int size() const { return static_cast<int>(pairs.size()); }
  /// Sorted by (model, scene); canonical form used for comparisons.
  CorrespondenceVector sorted() const;
  /// Throws Error(kInput) if indices repeat or fall outside [0,nx)x[0,ny).
  void validate(int nx, int ny) const;

  friend bool operator==(const CorrespondenceVector&,
                         const CorrespondenceVector&) = default;
};

/// The n_d x n_phi Jacobian of T at x, ordered exactly as the parameter
/// layouts listed on ModelKind.
Eigen::MatrixXd jacobian(ModelKind kind, const Eigen::VectorXd& x);

Eigen::VectorXd apply(ModelKind kind, const Eigen::VectorXd& phi,
                      const Eigen::VectorXd& x);

/// Transforms every point of `points`.
PointSet apply(ModelKind kind, const Eigen::VectorXd& phi,
               const PointSet& points);

/// Least-squares parameters for a fixed correspondence, from the accumulated
/// n_phi x n_phi normal equations. Throws kDegenerateConfiguration when the
/// normal matrix is not positive definite above 1e-10 * max diagonal.
Eigen::VectorXd solve_phi(ModelKind kind, const PointSet& model,
                          const PointSet& scene,
                          const CorrespondenceVector& corr);

/// Sum of squared residuals ||y_j - T(x_i|phi)||^2 over the matches.
double residual_energy(ModelKind kind, const Eigen::VectorXd& phi,
                       const PointSet& model, const PointSet& scene,
                       const CorrespondenceVector& corr);

}  // namespace iarpm
