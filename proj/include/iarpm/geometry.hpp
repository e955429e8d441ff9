#pragma once

#include "iarpm/assignment.hpp"
#include "iarpm/objective.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace iarpm {

/// Relative backoff from the spectrahedron boundary for extended points.
inline constexpr double kBoundaryBackoff = 1e-9;
/// Relative tolerance and iteration cap of the gamma-extension bisection.
inline constexpr double kBisectionTol = 1e-6;
inline constexpr int kBisectionMaxIter = 60;

/// Active-set tolerance for a generator g and polar vertex d.
double active_tolerance(const Eigen::VectorXd& g, const Eigen::VectorXd& d);

/// sup{t >= 0 : m0 + t md > 0}; t_cap when md never reduces definiteness.
/// Throws kInteriorPointInvalid if m0 is not PD.
double ray_boundary(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& md,
                    double t_cap);

/// Same, for the ray t d from the current origin v0 inside the concavity
/// region of `red`.
double ray_boundary(const ReducedObjective& red, const Eigen::VectorXd& d,
                    double t_cap);

/// Largest t in [1, t_max] with value(t) >= gamma, found by bisection;
/// value is concave in t, and may throw kOutsideConcavityRegion near t_max
/// (treated as below gamma). Throws kNotExtendable if value(1) < gamma - tol.
double gamma_extension(const std::function<double(double)>& value, double t_max,
                       double gamma);

/// gamma-extension of E2 along d, bounded by the spectrahedron.
double gamma_extension(const ReducedObjective& red, const Eigen::VectorXd& d,
                       double gamma, double t_cap);

struct PolarVertex {
  Eigen::VectorXd d;
  std::vector<int> active;  // sorted generator indices, size n_u
  /// neighbors[l] is the polar vertex across the edge that drops active[l].
  std::vector<int> neighbors;
  /// XOR of the generator keys of the active set.
  std::uint64_t key = 0;
  std::optional<double> mu;
  /// LAP maximizer for d. A cut copies it onto a new vertex when both
  /// endpoints of the crossed edge share it; mu is then left unset.
  std::optional<AssignmentSolution> witness;
};

/// D = co(generators) = {u : d^T u <= 1 for every polar vertex d}.
struct PolytopeState {
  int nu = 0;
  std::vector<Eigen::VectorXd> generators;
  /// Random 64-bit key per generator; a set of generators is keyed by XOR.
  std::vector<std::uint64_t> generator_keys;
  std::vector<PolarVertex> polar;
  /// Number of cuts that needed the perturbation retry.
  int perturbed_cuts = 0;
};

/// Simplex from n_u + 1 points with the origin strictly inside.
/// Throws kIllConditionedSimplex when a facet system has condition > 1e12.
PolytopeState init_polytope(const std::vector<Eigen::VectorXd>& vertices);

/// Replaces D by co(D u {z}): intersects the polar with z^T v <= 1.
/// Returns the index of the new generator. Throws kNoOpCut if z is in D and
/// kDegenerateVertex if the cut stays degenerate after one perturbation
/// retry. The generator actually inserted may be the perturbed point.
int cut_polar(PolytopeState& state, const Eigen::VectorXd& z);

/// Max over generators g of g^T d - 1 and the equality residual on the active
/// set; used by tests and debug audits.
struct PolarAudit {
  double max_violation = 0.0;
  double max_active_residual = 0.0;
  int extra_active = 0;
  /// Neighbor links that are not mutual or do not share n_u - 1 generators.
  int adjacency_errors = 0;
};
PolarAudit audit_polar(const PolytopeState& state);

}  // namespace iarpm
