#include "iarpm/objective.hpp"

#include "iarpm/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace iarpm {

namespace {

constexpr double kRowTol = 1e-9;
constexpr double kRankTol = 1e-10;

}  // namespace

double psd_threshold(const Eigen::MatrixXd& m) {
  return 1e-10 * m.trace() / static_cast<double>(m.rows());
}

bool is_positive_definite(const Eigen::MatrixXd& m) {
  if (!m.allFinite() || !(m.trace() > 0.0)) return false;
  // lambda_min(m) > delta  <=>  m - delta I admits a Cholesky factor.
  const Eigen::MatrixXd shifted =
      m - psd_threshold(m) * Eigen::MatrixXd::Identity(m.rows(), m.cols());
  const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
  return llt.info() == Eigen::Success;
}

XiRowMap select_xi_rows(const Eigen::MatrixXd& xi_per_point, int nphi) {
  XiRowMap map;
  map.nphi = nphi;
  map.entries.resize(static_cast<std::size_t>(nphi) * nphi);
  for (int r = 0; r < nphi * nphi; ++r) {
    const Eigen::RowVectorXd row = xi_per_point.row(r);
    const double scale = row.cwiseAbs().maxCoeff();
    XiEntry& entry = map.entries[static_cast<std::size_t>(r)];
    const double mean = row.mean();
    if (scale == 0.0 ||
        (row.array() - mean).abs().maxCoeff() <= kRowTol * scale) {
      entry.kind = XiEntry::Kind::kConstant;
      entry.constant = scale == 0.0 ? 0.0 : mean;
      continue;
    }
    bool matched = false;
    for (int k = 0; k < static_cast<int>(map.kept_rows.size()); ++k) {
      const Eigen::RowVectorXd kept = xi_per_point.row(map.kept_rows[k]);
      const double s = row.dot(kept) / kept.squaredNorm();
      if ((row - s * kept).cwiseAbs().maxCoeff() <= kRowTol * scale) {
        entry.kind = XiEntry::Kind::kScaled;
        entry.kept = k;
        entry.scale = s;
        matched = true;
        break;
      }
    }
    if (!matched) {
      entry.kind = XiEntry::Kind::kScaled;
      entry.kept = static_cast<int>(map.kept_rows.size());
      entry.scale = 1.0;
      map.kept_rows.push_back(r);
    }
  }
  return map;
}

int ReducedObjective::min_matches(ModelKind kind) {
  return kind == ModelKind::kAffine2d ? 3 : 2;
}

ReducedObjective::ReducedObjective(const PointSet& model, const PointSet& scene,
                                   ModelKind kind, int n_p)
    : model_(model), scene_(scene), kind_(kind) {
  if (model.dim() != point_dim(kind) || scene.dim() != point_dim(kind)) {
    throw Error(ErrorCode::kInput,
                std::string(to_string(kind)) + " expects " +
                    std::to_string(point_dim(kind)) + "D point sets");
  }
  nx_ = model.size();
  ny_ = scene.size();
  np_ = n_p;
  nphi_ = param_count(kind);
  if (n_p < min_matches(kind) || n_p > std::min(nx_, ny_)) {
    throw Error(ErrorCode::kInfeasibleCardinality,
                "n_p = " + std::to_string(n_p) + " must lie in [" +
                    std::to_string(min_matches(kind)) + ", " +
                    std::to_string(std::min(nx_, ny_)) + "]");
  }

  const int n = n_pairs();
  xi_point_.resize(nphi_ * nphi_, nx_);
  std::vector<Eigen::MatrixXd> jac(static_cast<std::size_t>(nx_));
  for (int i = 0; i < nx_; ++i) {
    jac[static_cast<std::size_t>(i)] = jacobian(kind, model.point(i));
    const Eigen::MatrixXd jtj =
        jac[static_cast<std::size_t>(i)].transpose() * jac[static_cast<std::size_t>(i)];
    for (int a = 0; a < nphi_; ++a) {
      for (int b = 0; b < nphi_; ++b) xi_point_(a * nphi_ + b, i) = jtj(a, b);
    }
  }
  row_map_ = select_xi_rows(xi_point_, nphi_);
  const int m = xi2_rows();
  xi2_point_.resize(m, nx_);
  for (int k = 0; k < m; ++k) xi2_point_.row(k) = xi_point_.row(row_map_.kept_rows[k]);

  rho_.resize(n);
  gamma_.resize(nphi_, n);
  for (int i = 0; i < nx_; ++i) {
    const Eigen::MatrixXd jt = jac[static_cast<std::size_t>(i)].transpose();
    for (int j = 0; j < ny_; ++j) {
      const Eigen::VectorXd y = scene.point(j);
      rho_(i * ny_ + j) = y.squaredNorm();
      gamma_.col(i * ny_ + j) = jt * y;
    }
  }

  const Eigen::MatrixXd a = stacked();
  const int ncols = static_cast<int>(a.cols());
  Eigen::MatrixXd a_free = a;
  const bool rows_pinned = np_ == nx_;
  const bool cols_pinned = np_ == ny_;
  fixed_part_ = rows_pinned || cols_pinned;
  if (fixed_part_) {
    // Remove the components along the row/column indicator vectors; their
    // inner products with any feasible p are pinned to one.
    for (int c = 0; c < ncols; ++c) {
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>
          block(a_free.col(c).data(), nx_, ny_);
      const double grand = block.mean();
      const Eigen::VectorXd row_mean = block.rowwise().mean();
      const Eigen::RowVectorXd col_mean = block.colwise().mean();
      if (rows_pinned && cols_pinned) {
        block.colwise() -= row_mean;
        block.rowwise() -= col_mean;
        block.array() += grand;
      } else if (rows_pinned) {
        block.colwise() -= row_mean;
      } else {
        block.rowwise() -= col_mean;
      }
    }
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> pivoted(a_free);
  pivoted.setThreshold(kRankTol);
  const int rank = static_cast<int>(pivoted.rank());
  if (rank == 0 || (!fixed_part_ && rank < nphi_ + 1)) {
    throw Error(ErrorCode::kDegenerateGeometry,
                "stacked reduction matrix has rank " + std::to_string(rank));
  }
  std::vector<int> kept;
  for (int c = 0; c < rank; ++c) kept.push_back(pivoted.colsPermutation().indices()(c));
  std::sort(kept.begin(), kept.end());
  for (int c = 0; c < ncols; ++c) {
    if (!std::binary_search(kept.begin(), kept.end(), c)) dropped_.push_back(c);
  }
  Eigen::MatrixXd a_kept(n, rank);
  for (int c = 0; c < rank; ++c) a_kept.col(c) = a_free.col(kept[static_cast<std::size_t>(c)]);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a_kept);
  q_ = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
  r_ = q_.transpose() * a_free;

  fixed_ = Eigen::VectorXd::Zero(ncols);
  if (fixed_part_) {
    for (int t = 0; t < np_; ++t) {
      const int row = t * ny_ + t;
      fixed_ += (a.row(row) - a_free.row(row)).transpose();
    }
  }
  v0_ = Eigen::VectorXd::Zero(rank);
}

Eigen::MatrixXd ReducedObjective::xi2() const {
  Eigen::MatrixXd out(xi2_rows(), n_pairs());
  for (int i = 0; i < nx_; ++i) {
    for (int j = 0; j < ny_; ++j) out.col(i * ny_ + j) = xi2_point_.col(i);
  }
  return out;
}

Eigen::MatrixXd ReducedObjective::xi() const {
  Eigen::MatrixXd out(nphi_ * nphi_, n_pairs());
  for (int i = 0; i < nx_; ++i) {
    for (int j = 0; j < ny_; ++j) out.col(i * ny_ + j) = xi_point_.col(i);
  }
  return out;
}

Eigen::MatrixXd ReducedObjective::stacked() const {
  const int m = xi2_rows();
  Eigen::MatrixXd a(n_pairs(), m + nphi_ + 1);
  for (int i = 0; i < nx_; ++i) {
    for (int j = 0; j < ny_; ++j) {
      const int row = i * ny_ + j;
      a.row(row).head(m) = xi2_point_.col(i).transpose();
      a.row(row).segment(m, nphi_) = gamma_.col(row).transpose();
      a(row, m + nphi_) = rho_(row);
    }
  }
  return a;
}

void ReducedObjective::set_v0(Eigen::VectorXd v0) {
  if (v0.size() != nu()) throw Error(ErrorCode::kInput, "v0 has wrong length");
  v0_ = std::move(v0);
}

Eigen::VectorXd ReducedObjective::lift_pairs(const CorrespondenceVector& corr) const {
  const int m = xi2_rows();
  Eigen::VectorXd a = Eigen::VectorXd::Zero(m + nphi_ + 1);
  for (const auto& p : corr.pairs) {
    const int row = p.model * ny_ + p.scene;
    a.head(m) += xi2_point_.col(p.model);
    a.segment(m, nphi_) += gamma_.col(row);
    a(m + nphi_) += rho_(row);
  }
  return a;
}

Eigen::VectorXd ReducedObjective::lift(const Eigen::VectorXd& u_prime) const {
  return fixed_ + r_.transpose() * u_prime;
}

Eigen::VectorXd ReducedObjective::lift_direction_xi2(const Eigen::VectorXd& d) const {
  return r_.leftCols(xi2_rows()).transpose() * d;
}

Eigen::VectorXd ReducedObjective::project(const CorrespondenceVector& corr) const {
  Eigen::VectorXd u = Eigen::VectorXd::Zero(nu());
  for (const auto& p : corr.pairs) u += q_.row(p.model * ny_ + p.scene).transpose();
  return u;
}

Eigen::MatrixXd ReducedObjective::reconstruct_matrix(
    const Eigen::VectorXd& xi2_values) const {
  if (xi2_values.size() != xi2_rows()) {
    throw Error(ErrorCode::kInput, "Xi2 value vector has wrong length");
  }
  Eigen::MatrixXd m(nphi_, nphi_);
  for (int a = 0; a < nphi_; ++a) {
    for (int b = 0; b < nphi_; ++b) {
      const XiEntry& e = row_map_.entries[static_cast<std::size_t>(a * nphi_ + b)];
      m(a, b) = e.kind == XiEntry::Kind::kConstant
                    ? e.constant * np_
                    : e.scale * xi2_values(e.kept);
    }
  }
  return m;
}

Eigen::MatrixXd ReducedObjective::reconstruct_linear(
    const Eigen::VectorXd& xi2_values) const {
  if (xi2_values.size() != xi2_rows()) {
    throw Error(ErrorCode::kInput, "Xi2 value vector has wrong length");
  }
  Eigen::MatrixXd m(nphi_, nphi_);
  for (int a = 0; a < nphi_; ++a) {
    for (int b = 0; b < nphi_; ++b) {
      const XiEntry& e = row_map_.entries[static_cast<std::size_t>(a * nphi_ + b)];
      m(a, b) = e.kind == XiEntry::Kind::kConstant ? 0.0
                                                   : e.scale * xi2_values(e.kept);
    }
  }
  return m;
}

double ReducedObjective::evaluate(const Eigen::VectorXd& lifted,
                                  bool from_pairs) const {
  const int m = xi2_rows();
  const Eigen::MatrixXd mat = reconstruct_matrix(lifted.head(m));
  if (!is_positive_definite(mat)) {
    if (from_pairs) {
      throw Error(ErrorCode::kDegenerateConfiguration,
                  "matched model points give a singular normal matrix");
    }
    throw Error(ErrorCode::kOutsideConcavityRegion,
                "reconstructed matrix is not positive definite");
  }
  const Eigen::VectorXd g = lifted.segment(m, nphi_);
  const Eigen::LLT<Eigen::MatrixXd> llt(mat);
  return lifted(m + nphi_) - g.dot(llt.solve(g));
}

double ReducedObjective::energy_p(const CorrespondenceVector& corr) const {
  if (corr.size() != np_) {
    throw Error(ErrorCode::kInput, "correspondence must have exactly n_p pairs");
  }
  corr.validate(nx_, ny_);
  return evaluate(lift_pairs(corr), true);
}

double ReducedObjective::energy_u(const Eigen::VectorXd& u_prime) const {
  if (u_prime.size() != nu()) throw Error(ErrorCode::kInput, "u' has wrong length");
  return evaluate(lift(u_prime), false);
}

double ReducedObjective::energy_shifted(const Eigen::VectorXd& u) const {
  return energy_u(u + v0_);
}

bool ReducedObjective::in_concavity_region(const Eigen::VectorXd& u_prime) const {
  return is_positive_definite(reconstruct_matrix(lift(u_prime).head(xi2_rows())));
}

}  // namespace iarpm
