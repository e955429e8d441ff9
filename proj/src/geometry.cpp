#include "iarpm/geometry.hpp"

#include "iarpm/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace iarpm {

double active_tolerance(const Eigen::VectorXd& g, const Eigen::VectorXd& d) {
  return 1e-8 * (1.0 + g.norm() * d.norm());
}

double ray_boundary(const Eigen::MatrixXd& m0, const Eigen::MatrixXd& md,
                    double t_cap) {
  if (!is_positive_definite(m0)) {
    throw Error(ErrorCode::kInteriorPointInvalid,
                "ray origin lies outside the concavity region");
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(m0);
  const auto l = llt.matrixL();
  // K = L^{-1} md L^{-T}
  const Eigen::MatrixXd half = l.solve(md);
  const Eigen::MatrixXd full = l.solve(half.transpose()).transpose();
  const Eigen::MatrixXd k = 0.5 * (full + full.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(-k, Eigen::EigenvaluesOnly);
  const double lmax = eig.eigenvalues()(eig.eigenvalues().size() - 1);
  if (!(lmax > 0.0)) return t_cap;
  return std::min(1.0 / lmax, t_cap);
}

double ray_boundary(const ReducedObjective& red, const Eigen::VectorXd& d,
                    double t_cap) {
  const int m = red.xi2_rows();
  const Eigen::MatrixXd m0 = red.reconstruct_matrix(red.lift(red.v0()).head(m));
  const Eigen::MatrixXd md = red.reconstruct_linear(red.lift_direction_xi2(d));
  return ray_boundary(m0, md, t_cap);
}

double gamma_extension(const std::function<double(double)>& value, double t_max,
                       double gamma) {
  const double slack = 1e-9 * std::max(1.0, std::abs(gamma));
  const auto reaches = [&](double t, double tol) {
    try {
      return value(t) >= gamma - tol;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kOutsideConcavityRegion) return false;
      throw;
    }
  };
  if (!(t_max >= 1.0) || !reaches(1.0, slack)) {
    throw Error(ErrorCode::kNotExtendable,
                "direction does not reach level gamma inside the region");
  }
  double hi = t_max * (1.0 - kBoundaryBackoff);
  if (hi <= 1.0) return 1.0;
  if (reaches(hi, 0.0)) return hi;
  double lo = 1.0;
  for (int it = 0; it < kBisectionMaxIter && hi - lo > kBisectionTol * lo; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (reaches(mid, 0.0)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

double gamma_extension(const ReducedObjective& red, const Eigen::VectorXd& d,
                       double gamma, double t_cap) {
  const double t0 = ray_boundary(red, d, t_cap);
  return gamma_extension(
      [&](double t) { return red.energy_shifted(t * d); }, t0, gamma);
}

namespace {

std::uint64_t generator_key(std::size_t index) {
  std::uint64_t x = 0x2545f4914f6cdd1dULL + 0x9e3779b97f4a7c15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void add_generator(PolytopeState& state, const Eigen::VectorXd& g) {
  state.generator_keys.push_back(generator_key(state.generators.size()));
  state.generators.push_back(g);
}

// True when the sorted sets a and b differ only in a single element each.
bool share_facet_ridge(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t i = 0;
  std::size_t j = 0;
  std::size_t common = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) {
      ++common;
      ++i;
      ++j;
    } else if (a[i] < b[j]) {
      ++i;
    } else {
      ++j;
    }
  }
  return common + 1 == a.size();
}

// True when a without position pa equals b without position pb.
bool same_ridge(const std::vector<int>& a, std::size_t pa, const std::vector<int>& b,
                std::size_t pb) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (true) {
    if (i == pa) ++i;
    if (j == pb) ++j;
    if (i >= a.size() || j >= b.size()) return i >= a.size() && j >= b.size();
    if (a[i] != b[j]) return false;
    ++i;
    ++j;
  }
}

void relink(std::vector<int>& neighbors, int from, int to) {
  const auto it = std::find(neighbors.begin(), neighbors.end(), from);
  if (it == neighbors.end()) {
    throw Error(ErrorCode::kDegenerateVertex, "polar adjacency is inconsistent");
  }
  *it = to;
}

enum class CutOutcome { kDone, kNearPlane };

struct RidgeEntry {
  std::uint64_t key;
  int vertex;
  int slot;
};

CutOutcome try_cut(PolytopeState& state, const Eigen::VectorXd& z,
                   double& near_tol) {
  const int count = static_cast<int>(state.polar.size());
  thread_local std::vector<double> side;
  thread_local std::vector<char> removed;
  side.assign(static_cast<std::size_t>(count), 0.0);
  removed.assign(static_cast<std::size_t>(count), 0);
  bool any_removed = false;
  near_tol = 0.0;
  const double z_norm = z.norm();
  for (int k = 0; k < count; ++k) {
    const auto& d = state.polar[static_cast<std::size_t>(k)].d;
    const double s = z.dot(d);
    const double tol = 1e-8 * (1.0 + z_norm * d.norm());  // active_tolerance(z, d)
    side[static_cast<std::size_t>(k)] = s;
    if (std::abs(s - 1.0) <= tol) {
      near_tol = std::max(near_tol, tol);
    } else if (s > 1.0) {
      removed[static_cast<std::size_t>(k)] = 1;
      any_removed = true;
    }
  }
  if (!any_removed) {
    throw Error(ErrorCode::kNoOpCut, "point already lies in the polytope");
  }
  if (near_tol > 0.0) return CutOutcome::kNearPlane;

  const int gen = static_cast<int>(state.generators.size());
  const std::uint64_t gen_key = generator_key(static_cast<std::size_t>(gen));
  const std::size_t n = static_cast<std::size_t>(state.nu);
  std::vector<PolarVertex> fresh;
  for (int r = 0; r < count; ++r) {
    if (!removed[static_cast<std::size_t>(r)]) continue;
    const auto& vr = state.polar[static_cast<std::size_t>(r)];
    for (std::size_t l = 0; l < n; ++l) {
      const int k = vr.neighbors[l];
      if (removed[static_cast<std::size_t>(k)]) continue;
      auto& vk = state.polar[static_cast<std::size_t>(k)];
      // The edge r-k crosses z . d = 1; t lies in (0, 1).
      const double sr = side[static_cast<std::size_t>(r)];
      const double sk = side[static_cast<std::size_t>(k)];
      const double t = (sr - 1.0) / (sr - sk);
      PolarVertex v;
      v.d = vr.d + t * (vk.d - vr.d);
      // Ridge (active set without position l) plus the new generator, which
      // has the largest index.
      v.active.reserve(n);
      for (std::size_t p = 0; p < n; ++p) {
        if (p != l) v.active.push_back(vr.active[p]);
      }
      v.active.push_back(gen);
      v.key = vr.key ^ state.generator_keys[static_cast<std::size_t>(vr.active[l])] ^ gen_key;
      v.neighbors.assign(n, -1);
      v.neighbors[n - 1] = k;
      relink(vk.neighbors, r, count + static_cast<int>(fresh.size()));
      // The support function of U is convex along the edge, so a maximizer
      // shared by both endpoints is also a maximizer at v.
      if (vr.witness && vk.witness && vr.witness->pairs == vk.witness->pairs) {
        v.witness = vr.witness;
      }
      fresh.push_back(std::move(v));
    }
  }

  // New vertices meet each other across ridges that contain the new generator.
  thread_local std::vector<RidgeEntry> ridges;
  ridges.clear();
  for (std::size_t f = 0; f < fresh.size(); ++f) {
    const auto& v = fresh[f];
    for (std::size_t p = 0; p + 1 < n; ++p) {
      ridges.push_back({v.key ^ state.generator_keys[static_cast<std::size_t>(v.active[p])],
                        static_cast<int>(f), static_cast<int>(p)});
    }
  }
  std::sort(ridges.begin(), ridges.end(),
            [](const RidgeEntry& x, const RidgeEntry& y) { return x.key < y.key; });
  for (std::size_t i = 0; i < ridges.size();) {
    std::size_t j = i;
    while (j < ridges.size() && ridges[j].key == ridges[i].key) ++j;
    for (std::size_t a = i; a < j; ++a) {
      auto& va = fresh[static_cast<std::size_t>(ridges[a].vertex)];
      const auto sa = static_cast<std::size_t>(ridges[a].slot);
      if (va.neighbors[sa] >= 0) continue;
      for (std::size_t b = a + 1; b < j; ++b) {
        auto& vb = fresh[static_cast<std::size_t>(ridges[b].vertex)];
        const auto sb = static_cast<std::size_t>(ridges[b].slot);
        if (vb.neighbors[sb] >= 0 || !same_ridge(va.active, sa, vb.active, sb)) continue;
        va.neighbors[sa] = count + ridges[b].vertex;
        vb.neighbors[sb] = count + ridges[a].vertex;
        break;
      }
      if (va.neighbors[sa] < 0) {
        throw Error(ErrorCode::kDegenerateVertex, "new polar vertex lacks a neighbor");
      }
    }
    i = j;
  }

  add_generator(state, z);
  for (auto& v : fresh) state.polar.push_back(std::move(v));
  // Swap-remove from the highest index down; the moved vertex is always kept.
  for (int r = count - 1; r >= 0; --r) {
    if (!removed[static_cast<std::size_t>(r)]) continue;
    const int last = static_cast<int>(state.polar.size()) - 1;
    if (r != last) {
      auto& moved = state.polar[static_cast<std::size_t>(last)];
      for (int nb : moved.neighbors) {
        relink(state.polar[static_cast<std::size_t>(nb)].neighbors, last, r);
      }
      state.polar[static_cast<std::size_t>(r)] = std::move(moved);
    }
    state.polar.pop_back();
  }
  return CutOutcome::kDone;
}

}  // namespace

PolytopeState init_polytope(const std::vector<Eigen::VectorXd>& vertices) {
  if (vertices.size() < 2) {
    throw Error(ErrorCode::kInput, "a simplex needs at least two vertices");
  }
  const int nu = static_cast<int>(vertices.size()) - 1;
  for (const auto& v : vertices) {
    if (v.size() != nu) throw Error(ErrorCode::kInput, "simplex vertex dimension mismatch");
  }
  PolytopeState state;
  state.nu = nu;
  for (const auto& v : vertices) add_generator(state, v);
  for (int j = 0; j <= nu; ++j) {
    Eigen::MatrixXd y(nu, nu);  // rows are the vertices other than j
    std::vector<int> active;
    int row = 0;
    for (int i = 0; i <= nu; ++i) {
      if (i == j) continue;
      y.row(row++) = vertices[static_cast<std::size_t>(i)].transpose();
      active.push_back(i);
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(y);
    const auto& sv = svd.singularValues();
    const double cond = sv(0) / sv(nu - 1);
    if (!(sv(nu - 1) > 0.0) || !(cond <= 1e12)) {
      throw Error(ErrorCode::kIllConditionedSimplex,
                  "facet system has condition number " + std::to_string(cond));
    }
    PolarVertex v;
    v.d = y.partialPivLu().solve(Eigen::VectorXd::Ones(nu));
    v.neighbors = active;  // dropping generator i leads to polar vertex i
    v.active = std::move(active);
    for (int g : v.active) v.key ^= state.generator_keys[static_cast<std::size_t>(g)];
    if (!(vertices[static_cast<std::size_t>(j)].dot(v.d) < 1.0)) {
      throw Error(ErrorCode::kInteriorPointInvalid,
                  "origin is not strictly inside the initial simplex");
    }
    state.polar.push_back(std::move(v));
  }
  return state;
}

int cut_polar(PolytopeState& state, const Eigen::VectorXd& z) {
  if (z.size() != state.nu) throw Error(ErrorCode::kInput, "cut point dimension mismatch");
  double near_tol = 0.0;
  if (try_cut(state, z, near_tol) == CutOutcome::kDone) {
    return static_cast<int>(state.generators.size()) - 1;
  }
  // Pull the point inward just enough that every vertex near the cutting
  // plane falls strictly on the kept side.
  const Eigen::VectorXd shrunk = z * (1.0 - 4.0 * near_tol);
  if (try_cut(state, shrunk, near_tol) == CutOutcome::kDone) {
    ++state.perturbed_cuts;
    return static_cast<int>(state.generators.size()) - 1;
  }
  throw Error(ErrorCode::kDegenerateVertex,
              "cut remains degenerate after perturbation");
}

PolarAudit audit_polar(const PolytopeState& state) {
  PolarAudit audit;
  const int count = static_cast<int>(state.polar.size());
  for (int id = 0; id < count; ++id) {
    const auto& v = state.polar[static_cast<std::size_t>(id)];
    for (std::size_t l = 0; l < v.neighbors.size(); ++l) {
      const int nb = v.neighbors[l];
      if (nb < 0 || nb >= count || nb == id) {
        ++audit.adjacency_errors;
        continue;
      }
      const auto& u = state.polar[static_cast<std::size_t>(nb)];
      const bool mutual = std::count(u.neighbors.begin(), u.neighbors.end(), id) == 1;
      const bool drops_l = !std::binary_search(u.active.begin(), u.active.end(), v.active[l]);
      if (!mutual || !drops_l || !share_facet_ridge(v.active, u.active)) {
        ++audit.adjacency_errors;
      }
    }
    if (v.neighbors.size() != v.active.size()) ++audit.adjacency_errors;
    for (int g = 0; g < static_cast<int>(state.generators.size()); ++g) {
      const auto& gen = state.generators[static_cast<std::size_t>(g)];
      const double s = gen.dot(v.d) - 1.0;
      const bool active = std::binary_search(v.active.begin(), v.active.end(), g);
      if (active) {
        audit.max_active_residual = std::max(audit.max_active_residual, std::abs(s));
      } else {
        audit.max_violation = std::max(audit.max_violation, s);
        if (std::abs(s) <= active_tolerance(gen, v.d)) ++audit.extra_active;
      }
    }
  }
  return audit;
}

}  // namespace iarpm
