#pragma once

#include "iarpm/objective.hpp"
#include "iarpm/transform_models.hpp"

#include <Eigen/Core>

namespace iarpm {

/// Maximize sum cost(i,j) p_ij over partial assignments with exactly k
/// matches (row sums <= 1, column sums <= 1, total = k).
struct AssignmentProblem {
  Eigen::MatrixXd cost;
  int k = 0;
};

struct AssignmentSolution {
  CorrespondenceVector pairs;  // sorted by model index
  double value = 0.0;
};

/// Sum of cost over the pairs in (model, scene) order. Both the solver and
/// the oracle report values through this function so that equal assignments
/// give bit-identical values.
double assignment_value(const Eigen::MatrixXd& cost,
                        const CorrespondenceVector& pairs);

/// Exact solver: successive shortest paths on the bipartite flow network
/// source -> rows -> columns -> sink with node potentials; each augmentation
/// adds one unit of flow, so stopping after k augmentations yields the
/// optimal k-cardinality assignment.
AssignmentSolution max_kcard_assignment(const AssignmentProblem& prob);

/// Enumerates all partial injections. Limited to n_x, n_y <= 8.
AssignmentSolution brute_force_assignment(const AssignmentProblem& prob);

struct LinearMaximum {
  Eigen::VectorXd u;  // Q^T p - v0 for the maximizing vertex p
  AssignmentSolution witness;
};

/// max{d^T u : u in U}: one k-cardinality assignment with per-pair cost
/// (Q d)(i * n_y + j).
LinearMaximum maximize_over_U(const ReducedObjective& red,
                              const Eigen::VectorXd& d);

}  // namespace iarpm
