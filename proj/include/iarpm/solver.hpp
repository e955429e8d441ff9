#pragma once

#include "iarpm/assignment.hpp"
#include "iarpm/geometry.hpp"
#include "iarpm/objective.hpp"
#include "iarpm/transform_models.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

namespace iarpm {

struct SolverConfig {
  /// Per-dimension tolerance; the run stops once every facet satisfies
  /// mu <= 1 + n_u * eps0.
  double eps0 = 0.3;
  int max_iterations = 10000;
  /// Seeds the randomized directions used when the first simplex is flat.
  std::uint64_t rng_seed = 0;
  /// Keep the reduction and final polytope in the result (for audits).
  bool keep_state = false;
};

enum class SolverStatus { kConverged, kIterationCap, kDegenerate };

std::string_view to_string(SolverStatus status);

struct IterationRecord {
  double max_mu = 0.0;
  double incumbent_energy = 0.0;
  double theta = 1.0;
  int polar_vertices = 0;
  int fresh_facets = 0;
};

struct SolverResult {
  CorrespondenceVector correspondence;
  Eigen::VectorXd phi;
  double energy = 0.0;
  /// max_i mu_i - 1 at the last evaluated polytope.
  double certificate_eps = 0.0;
  int iterations = 0;
  int nu = 0;
  SolverStatus status = SolverStatus::kConverged;
  std::vector<IterationRecord> trace;
  std::shared_ptr<const ReducedObjective> reduction;
  std::shared_ptr<const PolytopeState> polytope;
};

struct Translation {
  Eigen::VectorXd v0;
  std::vector<Eigen::VectorXd> vertices;  // v_i = v'_i - v0
  std::vector<AssignmentSolution> witnesses;
};

/// Maximizes e_1..e_{n_u} and -1 over U' and moves the origin to the
/// centroid of the n_u + 1 maximizers (stored into red). Falls back to up
/// to three seeded random direction sets when the maximizers are affinely
/// dependent; throws kDegenerateFeasibleRegion after that.
Translation translate_coordinates(ReducedObjective& red, std::uint64_t seed = 0);

SolverResult run_inner_approximation(const PointSet& model, const PointSet& scene,
                                     ModelKind kind, int n_p,
                                     const SolverConfig& config = {});

/// Exact minimum of the energy over every vertex of the feasible polytope.
/// Throws kOracleTooLarge beyond 1e5 vertices.
SolverResult brute_force_register(const PointSet& model, const PointSet& scene,
                                  ModelKind kind, int n_p);

/// Number of k-cardinality partial assignments between n_x and n_y points.
double count_partial_assignments(int nx, int ny, int k);

}  // namespace iarpm
