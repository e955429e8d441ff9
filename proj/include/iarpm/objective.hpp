#pragma once

#include "iarpm/transform_models.hpp"

#include <Eigen/Core>

#include <vector>

namespace iarpm {

/// How one entry of the symmetric n_phi x n_phi matrix sum_i J(x_i)^T J(x_i)
/// is recovered from the kept rows.
struct XiEntry {
  enum class Kind { kConstant, kScaled };
  Kind kind = Kind::kConstant;
  double constant = 0.0;  // entry = constant * n_p
  int kept = -1;          // entry = scale * kept-row value
  double scale = 0.0;
};

/// Row selection of Xi (rows of vec(J^T J), vec = row concatenation).
struct XiRowMap {
  std::vector<int> kept_rows;   // 0-based indices into the n_phi^2 entries
  std::vector<XiEntry> entries; // n_phi^2 entries, row-major
  int nphi = 0;
};

/// Detects constant and proportional rows on the per-model-point values of
/// vec(J(x_i)^T J(x_i)) (an n_phi^2 x n_x matrix), relative tolerance 1e-9.
XiRowMap select_xi_rows(const Eigen::MatrixXd& xi_per_point, int nphi);

/// Precomputed reduction of the correspondence energy to the low-dimensional
/// variable u' = Q^T p.
///
/// The stacked matrix A = [Xi2^T, Gamma^T, rho] (one row per pair (i,j),
/// index i * n_y + j) is split as A = A_fixed + Q R, where A_fixed^T p is the
/// same vector `fixed` for every feasible p. A_fixed is zero unless n_p equals
/// n_x or n_y, in which case every row (or column) sum of P is pinned to one.
/// Energies are evaluated on the lifted vector a = fixed + R^T u'.
class ReducedObjective {
 public:
  /// Throws kInfeasibleCardinality for n_p outside [min viable, min(n_x,n_y)]
  /// and kDegenerateGeometry when the stacked matrix collapses in rank.
  ReducedObjective(const PointSet& model, const PointSet& scene, ModelKind kind,
                   int n_p);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int np() const { return np_; }
  int nphi() const { return nphi_; }
  int nu() const { return static_cast<int>(q_.cols()); }
  int n_pairs() const { return nx_ * ny_; }
  int xi2_rows() const { return static_cast<int>(row_map_.kept_rows.size()); }
  ModelKind kind() const { return kind_; }
  const PointSet& model() const { return model_; }
  const PointSet& scene() const { return scene_; }

  const Eigen::VectorXd& rho() const { return rho_; }
  const Eigen::MatrixXd& gamma() const { return gamma_; }
  /// Xi2 column of model point i (every scene j shares it), m x n_x.
  const Eigen::MatrixXd& xi2_per_point() const { return xi2_point_; }
  /// Full Xi2, m x (n_x n_y).
  Eigen::MatrixXd xi2() const;
  /// Full Xi, n_phi^2 x (n_x n_y).
  Eigen::MatrixXd xi() const;
  /// [Xi2^T, Gamma^T, rho].
  Eigen::MatrixXd stacked() const;
  const XiRowMap& row_map() const { return row_map_; }
  const Eigen::MatrixXd& q() const { return q_; }
  const Eigen::MatrixXd& r() const { return r_; }
  const Eigen::VectorXd& fixed() const { return fixed_; }
  /// Columns of the stacked matrix found linearly dependent by the QR.
  const std::vector<int>& dropped_columns() const { return dropped_; }
  bool has_fixed_part() const { return fixed_part_; }

  const Eigen::VectorXd& v0() const { return v0_; }
  void set_v0(Eigen::VectorXd v0);

  /// A^T p, computed from the matches directly.
  Eigen::VectorXd lift_pairs(const CorrespondenceVector& corr) const;
  /// fixed + R^T u'.
  Eigen::VectorXd lift(const Eigen::VectorXd& u_prime) const;
  /// R^T d restricted to the Xi2 block: the linear part of the matrix along d.
  Eigen::VectorXd lift_direction_xi2(const Eigen::VectorXd& d) const;
  /// Q^T p.
  Eigen::VectorXd project(const CorrespondenceVector& corr) const;

  /// mat(.): Constant entries give c * n_p, scaled entries s * values[k].
  Eigen::MatrixXd reconstruct_matrix(const Eigen::VectorXd& xi2_values) const;
  /// Same map with constant entries set to zero (direction of a ray).
  Eigen::MatrixXd reconstruct_linear(const Eigen::VectorXd& xi2_values) const;

  /// rho^T p - (Gamma p)^T mat(Xi p)^{-1} (Gamma p).
  double energy_p(const CorrespondenceVector& corr) const;
  /// E(u'); throws kOutsideConcavityRegion when mat(.) is not PD.
  double energy_u(const Eigen::VectorXd& u_prime) const;
  /// E2(u) = E(u + v0).
  double energy_shifted(const Eigen::VectorXd& u) const;

  /// True when the reconstructed matrix at u' is positive definite above the
  /// scale-relative threshold.
  bool in_concavity_region(const Eigen::VectorXd& u_prime) const;

  /// Minimum cardinality for which sums of J^T J can be PD.
  static int min_matches(ModelKind kind);

 private:
  double evaluate(const Eigen::VectorXd& lifted, bool from_pairs) const;

  PointSet model_;
  PointSet scene_;
  ModelKind kind_;
  int nx_ = 0;
  int ny_ = 0;
  int np_ = 0;
  int nphi_ = 0;
  Eigen::VectorXd rho_;
  Eigen::MatrixXd gamma_;
  Eigen::MatrixXd xi_point_;   // n_phi^2 x n_x
  Eigen::MatrixXd xi2_point_;  // m x n_x
  XiRowMap row_map_;
  Eigen::MatrixXd q_;
  Eigen::MatrixXd r_;
  Eigen::VectorXd fixed_;
  std::vector<int> dropped_;
  bool fixed_part_ = false;
  Eigen::VectorXd v0_;
};

/// Positive-definiteness threshold: 1e-10 * trace / n.
double psd_threshold(const Eigen::MatrixXd& m);
/// Smallest eigenvalue minus threshold > 0.
bool is_positive_definite(const Eigen::MatrixXd& m);

}  // namespace iarpm
