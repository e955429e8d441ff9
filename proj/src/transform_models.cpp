#include "iarpm/transform_models.hpp"

#include "iarpm/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <set>

namespace iarpm {

int param_count(ModelKind kind) {
  return kind == ModelKind::kSimilarity2d ? 4 : 6;
}

int point_dim(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSimilarity2d:
    case ModelKind::kAffine2d: return 2;
    default: return 3;
  }
}

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSimilarity2d: return "similarity2d";
    case ModelKind::kAffine2d: return "affine2d";
    case ModelKind::kScaleTranslate3d: return "scale-translate3d";
    case ModelKind::kZrotScale3d: return "zrot-scale3d";
  }
  return "unknown";
}

std::optional<ModelKind> parse_model_kind(std::string_view name) {
  std::string key;
  for (char c : name) {
    if (c != '-' && c != '_') key.push_back(c);
  }
  if (key == "similarity2d") return ModelKind::kSimilarity2d;
  if (key == "affine2d") return ModelKind::kAffine2d;
  if (key == "scaletranslate3d") return ModelKind::kScaleTranslate3d;
  if (key == "zrotscale3d") return ModelKind::kZrotScale3d;
  return std::nullopt;
}

PointSet::PointSet(Eigen::MatrixXd points) : points_(std::move(points)) {
  if (points_.rows() < 1) throw Error(ErrorCode::kInput, "point set is empty");
  if (points_.cols() != 2 && points_.cols() != 3) {
    throw Error(ErrorCode::kInput, "points must be 2D or 3D, got dimension " +
                                       std::to_string(points_.cols()));
  }
  if (!points_.allFinite()) {
    throw Error(ErrorCode::kInput, "point coordinates must be finite");
  }
}

PointSet PointSet::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) throw Error(ErrorCode::kInput, "point set is empty");
  const auto dim = rows.front().size();
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(dim));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != dim) {
      throw Error(ErrorCode::kInput,
                  "inconsistent dimension at point " + std::to_string(i));
    }
    for (std::size_t c = 0; c < dim; ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return PointSet(std::move(m));
}

CorrespondenceVector CorrespondenceVector::sorted() const {
  CorrespondenceVector out = *this;
  std::sort(out.pairs.begin(), out.pairs.end());
  return out;
}

void CorrespondenceVector::validate(int nx, int ny) const {
  std::set<int> rows;
  std::set<int> cols;
  for (const auto& m : pairs) {
    if (m.model < 0 || m.model >= nx || m.scene < 0 || m.scene >= ny) {
      throw Error(ErrorCode::kInput, "match index out of range");
    }
    if (!rows.insert(m.model).second || !cols.insert(m.scene).second) {
      throw Error(ErrorCode::kInput, "correspondence reuses a point");
    }
  }
}

namespace {

void check_dim(ModelKind kind, Eigen::Index dim) {
  if (dim != point_dim(kind)) {
    throw Error(ErrorCode::kInput,
                std::string(to_string(kind)) + " expects " +
                    std::to_string(point_dim(kind)) + "D points, got " +
                    std::to_string(dim) + "D");
  }
}

}  // namespace

Eigen::MatrixXd jacobian(ModelKind kind, const Eigen::VectorXd& x) {
  check_dim(kind, x.size());
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(point_dim(kind), param_count(kind));
  switch (kind) {
    case ModelKind::kSimilarity2d:
      j << x(0), -x(1), 1, 0,
           x(1), x(0), 0, 1;
      break;
    case ModelKind::kAffine2d:
      j << x(0), x(1), 0, 0, 1, 0,
           0, 0, x(0), x(1), 0, 1;
      break;
    case ModelKind::kScaleTranslate3d:
      j << x(0), 0, 0, 1, 0, 0,
           0, x(1), 0, 0, 1, 0,
           0, 0, x(2), 0, 0, 1;
      break;
    case ModelKind::kZrotScale3d:
      j << x(0), -x(1), 0, 1, 0, 0,
           x(1), x(0), 0, 0, 1, 0,
           0, 0, x(2), 0, 0, 1;
      break;
  }
  return j;
}

Eigen::VectorXd apply(ModelKind kind, const Eigen::VectorXd& phi,
                      const Eigen::VectorXd& x) {
  if (phi.size() != param_count(kind)) {
    throw Error(ErrorCode::kInput, "parameter vector has wrong length");
  }
  return jacobian(kind, x) * phi;
}

PointSet apply(ModelKind kind, const Eigen::VectorXd& phi,
               const PointSet& points) {
  Eigen::MatrixXd out(points.size(), points.dim());
  for (int i = 0; i < points.size(); ++i) {
    out.row(i) = apply(kind, phi, points.point(i)).transpose();
  }
  return PointSet(std::move(out));
}

Eigen::VectorXd solve_phi(ModelKind kind, const PointSet& model,
                          const PointSet& scene,
                          const CorrespondenceVector& corr) {
  check_dim(kind, model.dim());
  check_dim(kind, scene.dim());
  corr.validate(model.size(), scene.size());
  const int nphi = param_count(kind);
  Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(nphi, nphi);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nphi);
  for (const auto& m : corr.pairs) {
    const Eigen::MatrixXd j = jacobian(kind, model.point(m.model));
    normal.noalias() += j.transpose() * j;
    rhs.noalias() += j.transpose() * scene.point(m.scene);
  }
  const double max_diag = normal.diagonal().maxCoeff();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(normal,
                                                     Eigen::EigenvaluesOnly);
  if (!(max_diag > 0.0) || eig.eigenvalues()(0) <= 1e-10 * max_diag) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "normal matrix of the matched model points is singular");
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
  Eigen::VectorXd phi = ldlt.solve(rhs);
  // one step of iterative refinement
  phi += ldlt.solve(rhs - normal * phi);
  return phi;
}

double residual_energy(ModelKind kind, const Eigen::VectorXd& phi,
                       const PointSet& model, const PointSet& scene,
                       const CorrespondenceVector& corr) {
  double e = 0.0;
  for (const auto& m : corr.pairs) {
    e += (scene.point(m.scene) - apply(kind, phi, model.point(m.model)))
             .squaredNorm();
  }
  return e;
}

}  // namespace iarpm
