#pragma once

#include "iarpm/solver.hpp"
#include "iarpm/transform_models.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace iarpm {

enum class RotationRule { kNone, kFullCircle2d, kZAxis3d };

std::string_view to_string(RotationRule rule);
RotationRule parse_rotation_rule(std::string_view name);
/// Full-circle rotation for the 2D kinds, z-axis rotation for zrot-scale3d,
/// none for scale-translate3d.
RotationRule default_rotation(ModelKind kind);

/// Names of the procedurally generated prototype shapes.
std::vector<std::string> shape_names();
/// n_points = 0 selects the shape's default size.
PointSet prototype_shape(const std::string& name, int n_points = 0);
/// Largest pairwise distance.
double diameter(const PointSet& points);

struct TrialSpec {
  std::string shape = "spiral";
  ModelKind kind = ModelKind::kSimilarity2d;
  int n_points = 0;
  int n_outliers = 0;
  double occlusion_fraction = 0.0;
  RotationRule rotation = RotationRule::kFullCircle2d;
  double scale_min = 0.5;
  double scale_max = 1.5;
  /// Standard deviation relative to the prototype diameter.
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;
  /// n_p as a fraction of the ground-truth inlier count.
  double n_p_fraction = 1.0;

  /// Throws Error(kInvalidSpec) naming the offending field.
  void validate() const;
};

struct Trial {
  PointSet model;
  PointSet scene;
  /// Surviving model inliers and the scene points they came from.
  CorrespondenceVector truth;
  /// Maps model coordinates onto scene coordinates.
  Eigen::VectorXd truth_phi;
  double diameter = 0.0;
  int n_p = 0;
  /// Bounding box the outliers were drawn from.
  Eigen::VectorXd outlier_box_min;
  Eigen::VectorXd outlier_box_max;
};

/// Scene = prototype + uniform outliers in the 1.5x inflated bounding box,
/// model = randomly transformed prototype minus the points nearest a random
/// half-plane; independent Gaussian noise on both. Points of both sets are
/// shuffled. Deterministic given spec.seed.
Trial generate_trial(const TrialSpec& spec);

/// sqrt(sum ||T(x_i|phi) - y_j||^2 / (m * n_d)) over the given pairs.
double rms_error(const Eigen::VectorXd& phi, ModelKind kind,
                 const CorrespondenceVector& pairs, const PointSet& model,
                 const PointSet& scene);

struct TrialResult {
  int trial_id = 0;
  std::string shape;
  int n_outliers = 0;
  double occlusion_fraction = 0.0;
  int n_p = 0;
  double rms_error = 0.0;
  double energy = 0.0;
  int iterations = 0;
  double runtime_seconds = 0.0;
  std::string status;
  double diameter = 0.0;
};

struct SuiteSummary {
  int trials = 0;
  int completed = 0;  // trials that produced a result (any solver status)
  int converged = 0;
  double mean_rms_error = 0.0;
  double median_rms_error = 0.0;
  double mean_runtime_seconds = 0.0;
  double median_runtime_seconds = 0.0;
};

struct SuiteReport {
  std::vector<TrialResult> results;
  SuiteSummary summary;
};

TrialResult run_trial(int trial_id, const TrialSpec& spec, const SolverConfig& config);

/// Runs trials on up to `jobs` threads; results are in spec order and do not
/// depend on the thread count. Failures are recorded in the status column.
SuiteReport run_suite(const std::vector<TrialSpec>& specs, const SolverConfig& config,
                      int jobs = 1);

SuiteSummary summarize(const std::vector<TrialResult>& results);

/// Seed of trial `index` in a suite seeded with `suite_seed`.
std::uint64_t trial_seed(std::uint64_t suite_seed, std::uint64_t index);

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& results);
std::vector<TrialResult> read_trials_csv(std::istream& in);
std::string summary_json(const SuiteSummary& summary);

}  // namespace iarpm
