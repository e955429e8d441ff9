#include "iarpm/assignment.hpp"

#include "iarpm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace iarpm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using RowMajorMap =
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename Mat>
void check_problem(const Mat& cost, int k) {
  const auto nx = cost.rows();
  const auto ny = cost.cols();
  if (k < 1 || k > std::min(nx, ny)) {
    throw Error(ErrorCode::kInfeasibleCardinality,
                "k = " + std::to_string(k) + " outside [1, " +
                    std::to_string(std::min(nx, ny)) + "]");
  }
  if (!cost.allFinite()) {
    throw Error(ErrorCode::kInput, "assignment costs must be finite");
  }
}

template <typename Mat>
double value_of(const Mat& cost, const CorrespondenceVector& pairs) {
  const auto sum = [&](const std::vector<Match>& ordered) {
    double v = 0.0;
    for (const auto& m : ordered) v += cost(m.model, m.scene);
    return v;
  };
  if (std::is_sorted(pairs.pairs.begin(), pairs.pairs.end())) return sum(pairs.pairs);
  return sum(pairs.sorted().pairs);
}

template <typename Mat>
AssignmentSolution solve_kcard(const Mat& c, int k) {
  check_problem(c, k);
  const int nx = static_cast<int>(c.rows());
  const int ny = static_cast<int>(c.cols());
  // Minimize w = -cost.
  const double tol = 1e-12 * std::max(1e-300, c.cwiseAbs().maxCoeff());

  // One workspace per thread; the solver is called once per polar vertex.
  thread_local std::vector<double> dbuf;
  thread_local std::vector<int> ibuf;
  thread_local std::vector<char> flags;
  dbuf.assign(static_cast<std::size_t>(2 * (nx + ny)), 0.0);
  ibuf.assign(static_cast<std::size_t>(2 * (nx + ny)), -1);
  flags.assign(static_cast<std::size_t>(nx + ny), 0);
  double* pot_row = dbuf.data();
  double* pot_col = pot_row + nx;
  double* dist_row = pot_col + ny;
  double* dist_col = dist_row + nx;
  int* row_match = ibuf.data();
  int* col_match = row_match + nx;
  int* parent_row = col_match + ny;  // column we came from, -1 for source
  int* parent_col = parent_row + nx;  // row we came from
  char* done_row = flags.data();
  char* done_col = done_row + nx;

  // Potentials from the acyclic initial network: source/rows at 0, each
  // column at its cheapest incoming arc, sink at the cheapest column.
  double pot_sink = kInf;
  for (int j = 0; j < ny; ++j) {
    double best = kInf;
    for (int i = 0; i < nx; ++i) best = std::min(best, -c(i, j));
    pot_col[j] = best;
    pot_sink = std::min(pot_sink, best);
  }

  for (int flow = 0; flow < k; ++flow) {
    std::fill(dist_row, dist_row + nx, kInf);
    std::fill(dist_col, dist_col + ny, kInf);
    std::fill(done_row, done_row + nx + ny, 0);
    std::fill(parent_row, parent_row + nx + ny, -1);
    for (int i = 0; i < nx; ++i) {
      if (row_match[i] < 0) dist_row[i] = -pot_row[i];
    }
    double dist_sink = kInf;
    int sink_parent = -1;

    while (true) {
      // Dense Dijkstra: scan rows then columns, first strict minimum wins.
      int best_row = -1;
      int best_col = -1;
      double best = kInf;
      for (int i = 0; i < nx; ++i) {
        if (!done_row[i] && dist_row[i] < best) {
          best = dist_row[i];
          best_row = i;
        }
      }
      for (int j = 0; j < ny; ++j) {
        if (!done_col[j] && dist_col[j] < best) {
          best = dist_col[j];
          best_row = -1;
          best_col = j;
        }
      }
      if (best == kInf || dist_sink <= best) break;
      if (best_row >= 0) {
        const int i = best_row;
        done_row[i] = 1;
        for (int j = 0; j < ny; ++j) {
          if (done_col[j] || row_match[i] == j) continue;
          const double nd = dist_row[i] - c(i, j) + pot_row[i] - pot_col[j];
          if (nd < dist_col[j] - tol) {
            dist_col[j] = nd;
            parent_col[j] = i;
          }
        }
      } else {
        const int j = best_col;
        done_col[j] = 1;
        const int i = col_match[j];
        if (i < 0) {
          const double nd = dist_col[j] + pot_col[j] - pot_sink;
          if (nd < dist_sink - tol) {
            dist_sink = nd;
            sink_parent = j;
          }
        } else if (!done_row[i]) {
          const double nd = dist_col[j] + c(i, j) + pot_col[j] - pot_row[i];
          if (nd < dist_row[i] - tol) {
            dist_row[i] = nd;
            parent_row[i] = j;
          }
        }
      }
    }
    if (sink_parent < 0) {
      throw Error(ErrorCode::kInfeasibleCardinality, "no augmenting path");
    }

    for (int i = 0; i < nx; ++i) pot_row[i] += std::min(dist_row[i], dist_sink);
    for (int j = 0; j < ny; ++j) pot_col[j] += std::min(dist_col[j], dist_sink);
    pot_sink += dist_sink;

    int j = sink_parent;
    while (true) {
      const int i = parent_col[j];
      const int prev = parent_row[i];
      row_match[i] = j;
      col_match[j] = i;
      if (prev < 0) break;
      j = prev;
    }
  }

  AssignmentSolution sol;
  sol.pairs.pairs.reserve(static_cast<std::size_t>(k));
  for (int i = 0; i < nx; ++i) {
    if (row_match[i] >= 0) sol.pairs.pairs.push_back({i, row_match[i]});
  }
  sol.value = value_of(c, sol.pairs);
  return sol;
}

}  // namespace

double assignment_value(const Eigen::MatrixXd& cost,
                        const CorrespondenceVector& pairs) {
  return value_of(cost, pairs);
}

AssignmentSolution max_kcard_assignment(const AssignmentProblem& prob) {
  return solve_kcard(prob.cost, prob.k);
}

namespace {

struct Enumerator {
  const Eigen::MatrixXd& cost;
  int k;
  std::vector<char> used;
  std::vector<Match> current;
  std::vector<Match> best_pairs;
  double best = -kInf;

  void run(int row, double acc) {
    const int nx = static_cast<int>(cost.rows());
    const int remaining = k - static_cast<int>(current.size());
    if (remaining == 0) {
      if (acc > best) {
        best = acc;
        best_pairs = current;
      }
      return;
    }
    if (nx - row < remaining) return;
    for (int j = 0; j < cost.cols(); ++j) {
      if (used[j]) continue;
      used[j] = 1;
      current.push_back({row, j});
      run(row + 1, acc + cost(row, j));
      current.pop_back();
      used[j] = 0;
    }
    run(row + 1, acc);
  }
};

}  // namespace

AssignmentSolution brute_force_assignment(const AssignmentProblem& prob) {
  if (prob.cost.rows() > 8 || prob.cost.cols() > 8) {
    throw Error(ErrorCode::kOracleTooLarge,
                "brute-force assignment limited to 8x8");
  }
  check_problem(prob.cost, prob.k);
  Enumerator e{prob.cost, prob.k, std::vector<char>(prob.cost.cols(), 0), {},
               {}, -kInf};
  e.run(0, 0.0);
  AssignmentSolution sol;
  sol.pairs.pairs = e.best_pairs;
  sol.value = assignment_value(prob.cost, sol.pairs);
  return sol;
}

LinearMaximum maximize_over_U(const ReducedObjective& red,
                              const Eigen::VectorXd& d) {
  if (d.size() != red.nu() || !d.allFinite()) {
    throw Error(ErrorCode::kInput, "direction must be finite with length n_u");
  }
  thread_local Eigen::VectorXd flat;
  flat.noalias() = red.q() * d;
  LinearMaximum out;
  out.witness = solve_kcard(RowMajorMap(flat.data(), red.nx(), red.ny()), red.np());
  out.u = red.project(out.witness.pairs) - red.v0();
  return out;
}

}  // namespace iarpm
