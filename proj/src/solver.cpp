#include "iarpm/solver.hpp"

#include "iarpm/errors.hpp"
#include "iarpm/log.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_map>

namespace iarpm {

std::string_view to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kConverged: return "Converged";
    case SolverStatus::kIterationCap: return "IterationCap";
    case SolverStatus::kDegenerate: return "Degenerate";
  }
  return "Unknown";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int affine_rank(const std::vector<Eigen::VectorXd>& points) {
  const int nu = static_cast<int>(points.front().size());
  Eigen::MatrixXd diff(nu, static_cast<Eigen::Index>(points.size()) - 1);
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    diff.col(static_cast<Eigen::Index>(i)) = points[i] - points.back();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(diff);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || !(sv(0) > 0.0)) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > 1e-9 * sv(0)) ++rank;
  }
  return rank;
}

std::uint64_t pairs_hash(const CorrespondenceVector& c) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const auto& m : c.pairs) {
    h = (h ^ static_cast<std::uint64_t>(m.model)) * 1099511628211ULL;
    h = (h ^ static_cast<std::uint64_t>(m.scene)) * 1099511628211ULL;
  }
  return h;
}

struct Incumbent {
  double energy = kInf;
  CorrespondenceVector pairs;
  // Energies of witnesses already scored; LAP witnesses repeat heavily.
  std::unordered_multimap<std::uint64_t, std::pair<std::vector<Match>, double>> seen;

  // Returns the witness energy, or +inf when its normal matrix is singular.
  double consider(const ReducedObjective& red, const AssignmentSolution& w) {
    const std::uint64_t h = pairs_hash(w.pairs);
    const auto range = seen.equal_range(h);
    for (auto it = range.first; it != range.second; ++it) {
      if (it->second.first == w.pairs.pairs) return it->second.second;
    }
    double e = kInf;
    try {
      e = red.energy_p(w.pairs);
    } catch (const Error& err) {
      if (err.code() != ErrorCode::kDegenerateConfiguration) throw;
    }
    seen.emplace(h, std::make_pair(w.pairs.pairs, e));
    if (!std::isfinite(e)) return kInf;
    if (e < energy) {
      energy = e;
      pairs = w.pairs;
    }
    return e;
  }
};

double extension_cap(const Eigen::VectorXd& d, double max_norm) {
  return 1e6 * max_norm / d.norm();
}

// gamma-extension with the theta = 1 fallback.
double extend(const ReducedObjective& red, const Eigen::VectorXd& d, double gamma,
              double max_norm) {
  try {
    return gamma_extension(red, d, gamma, extension_cap(d, max_norm));
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kNotExtendable) throw;
    logger().debug("gamma-extension not possible, using theta = 1");
    return 1.0;
  }
}

}  // namespace

Translation translate_coordinates(ReducedObjective& red, std::uint64_t seed) {
  const int nu = red.nu();
  red.set_v0(Eigen::VectorXd::Zero(nu));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  for (int attempt = 0; attempt <= 3; ++attempt) {
    std::vector<Eigen::VectorXd> directions;
    if (attempt == 0) {
      for (int i = 0; i < nu; ++i) directions.push_back(Eigen::VectorXd::Unit(nu, i));
      directions.push_back(-Eigen::VectorXd::Ones(nu));
    } else {
      for (int i = 0; i <= nu; ++i) {
        Eigen::VectorXd h(nu);
        for (int c = 0; c < nu; ++c) h(c) = normal(rng);
        directions.push_back(h);
      }
    }
    Translation out;
    std::vector<Eigen::VectorXd> primed;
    for (const auto& h : directions) {
      LinearMaximum best = maximize_over_U(red, h);
      primed.push_back(best.u);  // v0 is zero here, so u = u'
      out.witnesses.push_back(std::move(best.witness));
    }
    if (affine_rank(primed) < nu) {
      logger().info("LAP vertices are affinely dependent (attempt {})", attempt);
      continue;
    }
    // Centroid of the n_u + 1 points, strictly inside their simplex.
    out.v0 = Eigen::VectorXd::Zero(nu);
    for (const auto& v : primed) out.v0 += v;
    out.v0 /= static_cast<double>(primed.size());
    for (const auto& v : primed) out.vertices.push_back(v - out.v0);
    red.set_v0(out.v0);
    return out;
  }
  throw Error(ErrorCode::kDegenerateFeasibleRegion,
              "feasible region is not full-dimensional in the reduced space");
}

SolverResult run_inner_approximation(const PointSet& model, const PointSet& scene,
                                     ModelKind kind, int n_p,
                                     const SolverConfig& config) {
  if (!(config.eps0 > 0.0) || config.max_iterations < 1) {
    throw Error(ErrorCode::kInput, "eps0 must be positive and max_iterations >= 1");
  }
  auto red = std::make_shared<ReducedObjective>(model, scene, kind, n_p);
  const Translation start = translate_coordinates(*red, config.rng_seed);
  const int nu = red->nu();
  const double eps = nu * config.eps0;

  Incumbent best;
  for (const auto& w : start.witnesses) best.consider(*red, w);
  if (!std::isfinite(best.energy)) {
    throw Error(ErrorCode::kDegenerateConfiguration,
                "no initial vertex has a nonsingular normal matrix");
  }

  SolverResult result;
  result.nu = nu;
  result.status = SolverStatus::kIterationCap;
  auto state = std::make_shared<PolytopeState>();

  try {
    double max_norm = 0.0;
    for (const auto& v : start.vertices) max_norm = std::max(max_norm, v.norm());
    std::vector<Eigen::VectorXd> extended;
    for (const auto& v : start.vertices) {
      const double theta = extend(*red, v, best.energy, max_norm);
      extended.push_back(theta * v);
    }
    for (const auto& g : extended) {
      if (!red->in_concavity_region(g + red->v0())) {
        throw Error(ErrorCode::kDegenerateGeometry,
                    "initial simplex vertex lies outside the concavity region");
      }
      max_norm = std::max(max_norm, g.norm());
    }
    *state = init_polytope(extended);

    double max_mu = kInf;
    for (int iter = 0;; ++iter) {
      int fresh = 0;
      for (auto& facet : state->polar) {
        if (facet.mu) continue;
        if (facet.witness) {
          // Maximizer inherited from both edge endpoints; already scored.
          facet.mu = facet.d.dot(red->project(facet.witness->pairs) - red->v0());
          continue;
        }
        LinearMaximum lm = maximize_over_U(*red, facet.d);
        facet.mu = facet.d.dot(lm.u);
        best.consider(*red, lm.witness);
        facet.witness = std::move(lm.witness);
        ++fresh;
      }
      int top = 0;
      for (int k = 1; k < static_cast<int>(state->polar.size()); ++k) {
        if (*state->polar[static_cast<std::size_t>(k)].mu >
            *state->polar[static_cast<std::size_t>(top)].mu) {
          top = k;
        }
      }
      max_mu = *state->polar[static_cast<std::size_t>(top)].mu;
      IterationRecord rec;
      rec.max_mu = max_mu;
      rec.incumbent_energy = best.energy;
      rec.polar_vertices = static_cast<int>(state->polar.size());
      rec.fresh_facets = fresh;
      result.iterations = iter;
      if (max_mu <= 1.0 + eps) {
        result.trace.push_back(rec);
        result.status = SolverStatus::kConverged;
        break;
      }
      if (iter >= config.max_iterations) {
        result.trace.push_back(rec);
        break;
      }

      const AssignmentSolution witness = *state->polar[static_cast<std::size_t>(top)].witness;
      const Eigen::VectorXd z = red->project(witness.pairs) - red->v0();
      const double ez = best.consider(*red, witness);
      const double gamma = std::min(ez, best.energy);
      double theta = 1.0;
      if (std::isfinite(ez)) theta = extend(*red, z, gamma, max_norm);
      const Eigen::VectorXd z_ext = theta * z;
      if (!red->in_concavity_region(z_ext + red->v0())) {
        throw Error(ErrorCode::kDegenerateGeometry,
                    "expansion point lies outside the concavity region");
      }
      max_norm = std::max(max_norm, z_ext.norm());
      cut_polar(*state, z_ext);
      rec.theta = theta;
      result.trace.push_back(rec);
      logger().debug("iter {} max_mu {:.6f} incumbent {:.6g} theta {:.4f} facets {}",
                     iter, max_mu, best.energy, theta, state->polar.size());
    }
    result.certificate_eps = max_mu - 1.0;
  } catch (const Error& e) {
    logger().warn("inner approximation stopped early: {}", e.what());
    result.status = SolverStatus::kDegenerate;
    result.certificate_eps = kInf;
  }

  result.correspondence = best.pairs.sorted();
  result.energy = best.energy;
  result.phi = solve_phi(kind, model, scene, result.correspondence);
  if (config.keep_state) {
    result.reduction = red;
    result.polytope = state;
  }
  return result;
}

double count_partial_assignments(int nx, int ny, int k) {
  // C(nx, k) * ny! / (ny - k)!
  double count = 1.0;
  for (int t = 0; t < k; ++t) {
    count *= static_cast<double>(nx - t) / static_cast<double>(t + 1);
    count *= static_cast<double>(ny - t);
  }
  return count;
}

SolverResult brute_force_register(const PointSet& model, const PointSet& scene,
                                  ModelKind kind, int n_p) {
  const ReducedObjective red(model, scene, kind, n_p);
  if (count_partial_assignments(red.nx(), red.ny(), n_p) > 1e5) {
    throw Error(ErrorCode::kOracleTooLarge, "more than 1e5 feasible vertices");
  }
  Incumbent best;
  std::vector<char> used(static_cast<std::size_t>(red.ny()), 0);
  AssignmentSolution current;
  const auto recurse = [&](auto&& self, int row) -> void {
    const int remaining = n_p - current.pairs.size();
    if (remaining == 0) {
      best.consider(red, current);
      return;
    }
    if (red.nx() - row < remaining) return;
    for (int j = 0; j < red.ny(); ++j) {
      if (used[static_cast<std::size_t>(j)]) continue;
      used[static_cast<std::size_t>(j)] = 1;
      current.pairs.pairs.push_back({row, j});
      self(self, row + 1);
      current.pairs.pairs.pop_back();
      used[static_cast<std::size_t>(j)] = 0;
    }
    self(self, row + 1);
  };
  recurse(recurse, 0);
  if (!std::isfinite(best.energy)) {
    throw Error(ErrorCode::kDegenerateConfiguration, "every vertex is degenerate");
  }
  SolverResult result;
  result.nu = red.nu();
  result.correspondence = best.pairs.sorted();
  result.energy = best.energy;
  result.phi = solve_phi(kind, model, scene, result.correspondence);
  return result;
}

}  // namespace iarpm
