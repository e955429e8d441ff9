#include "iarpm/bench.hpp"

#include "iarpm/errors.hpp"
#include "iarpm/log.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace iarpm {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(ErrorCode::kInvalidSpec, field + ": " + why);
}

PointSet ellipse(int n) {
  Eigen::MatrixXd p(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * i / n;
    p.row(i) << std::cos(t), 0.6 * std::sin(t);
  }
  return PointSet(std::move(p));
}

// Five arms of unequal length so that no rotation maps the star onto itself.
PointSet star(int n) {
  const double arm[5] = {1.0, 0.8, 0.95, 0.7, 0.88};
  const double inner = 0.38;
  Eigen::MatrixXd corners(10, 2);
  for (int k = 0; k < 10; ++k) {
    const double a = kPi / 2 + kPi * k / 5;
    const double r = k % 2 == 0 ? arm[k / 2] : inner;
    corners.row(k) << r * std::cos(a), r * std::sin(a);
  }
  std::vector<double> cumulative(11, 0.0);
  for (int k = 0; k < 10; ++k) {
    cumulative[k + 1] = cumulative[k] + (corners.row((k + 1) % 10) - corners.row(k)).norm();
  }
  Eigen::MatrixXd p(n, 2);
  int edge = 0;
  for (int i = 0; i < n; ++i) {
    const double s = cumulative[10] * i / n;
    while (cumulative[edge + 1] < s) ++edge;
    const double f = (s - cumulative[edge]) / (cumulative[edge + 1] - cumulative[edge]);
    p.row(i) = (1 - f) * corners.row(edge) + f * corners.row((edge + 1) % 10);
  }
  return PointSet(std::move(p));
}

PointSet spiral(int n) {
  Eigen::MatrixXd p(n, 2);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double a = 3.0 * kPi * t;
    const double r = 0.2 + 0.8 * t;
    p.row(i) << r * std::cos(a), r * std::sin(a);
  }
  return PointSet(std::move(p));
}

PointSet helix(int n) {
  Eigen::MatrixXd p(n, 3);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / (n - 1);
    const double a = 4.0 * kPi * t;
    p.row(i) << std::cos(a), 0.8 * std::sin(a), 2.0 * t - 1.0;
  }
  return PointSet(std::move(p));
}

// Three faces of a box meeting at a corner, sampled on a golden-ratio
// sequence so that no two points share a coordinate.
PointSet box_corner(int n) {
  Eigen::MatrixXd p(n, 3);
  const double g1 = 0.6180339887498949;
  const double g2 = 0.7548776662466927;
  for (int i = 0; i < n; ++i) {
    const double a = std::fmod(0.5 + g1 * i, 1.0);
    const double b = std::fmod(0.5 + g2 * i, 1.0);
    switch (i % 3) {
      case 0: p.row(i) << a, b * 0.8, 0.0; break;
      case 1: p.row(i) << 0.0, a * 0.8, b * 0.6; break;
      default: p.row(i) << a, 0.0, b * 0.6; break;
    }
  }
  p.rowwise() -= p.colwise().mean();
  return PointSet(std::move(p));
}

Eigen::MatrixXd rotation_2d(double a) {
  Eigen::MatrixXd r(2, 2);
  r << std::cos(a), -std::sin(a), std::sin(a), std::cos(a);
  return r;
}

Eigen::VectorXd encode_phi(ModelKind kind, const Eigen::MatrixXd& b,
                           const Eigen::VectorXd& c) {
  Eigen::VectorXd phi(param_count(kind));
  switch (kind) {
    case ModelKind::kSimilarity2d: phi << b(0, 0), b(1, 0), c(0), c(1); break;
    case ModelKind::kAffine2d: phi << b(0, 0), b(0, 1), b(1, 0), b(1, 1), c(0), c(1); break;
    case ModelKind::kScaleTranslate3d: phi << b(0, 0), b(1, 1), b(2, 2), c(0), c(1), c(2); break;
    case ModelKind::kZrotScale3d: phi << b(0, 0), b(1, 0), b(2, 2), c(0), c(1), c(2); break;
  }
  return phi;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view to_string(RotationRule rule) {
  switch (rule) {
    case RotationRule::kNone: return "none";
    case RotationRule::kFullCircle2d: return "full";
    case RotationRule::kZAxis3d: return "z";
  }
  return "none";
}

RotationRule parse_rotation_rule(std::string_view name) {
  if (name == "none") return RotationRule::kNone;
  if (name == "full") return RotationRule::kFullCircle2d;
  if (name == "z") return RotationRule::kZAxis3d;
  invalid("rotation", "expected one of none, full, z; got '" + std::string(name) + "'");
}

RotationRule default_rotation(ModelKind kind) {
  switch (kind) {
    case ModelKind::kSimilarity2d:
    case ModelKind::kAffine2d: return RotationRule::kFullCircle2d;
    case ModelKind::kZrotScale3d: return RotationRule::kZAxis3d;
    default: return RotationRule::kNone;
  }
}

std::vector<std::string> shape_names() {
  return {"ellipse", "star", "spiral", "helix", "box-corner"};
}

PointSet prototype_shape(const std::string& name, int n_points) {
  if (n_points < 0 || (n_points > 0 && n_points < 4)) {
    invalid("n_points", "must be 0 (default) or at least 4");
  }
  if (name == "ellipse") return ellipse(n_points ? n_points : 40);
  if (name == "star") return star(n_points ? n_points : 40);
  if (name == "spiral") return spiral(n_points ? n_points : 30);
  if (name == "helix") return helix(n_points ? n_points : 36);
  if (name == "box-corner") return box_corner(n_points ? n_points : 36);
  invalid("shape", "unknown shape '" + name + "'");
}

double diameter(const PointSet& points) {
  double best = 0.0;
  const auto& m = points.matrix();
  for (int i = 0; i < points.size(); ++i) {
    for (int j = i + 1; j < points.size(); ++j) {
      best = std::max(best, (m.row(i) - m.row(j)).squaredNorm());
    }
  }
  return std::sqrt(best);
}

void TrialSpec::validate() const {
  const auto names = shape_names();
  if (std::find(names.begin(), names.end(), shape) == names.end()) {
    invalid("shape", "unknown shape '" + shape + "'");
  }
  if (n_outliers < 0) invalid("n_outliers", "must be non-negative");
  if (!(occlusion_fraction >= 0.0 && occlusion_fraction < 1.0)) {
    invalid("occlusion_fraction", "must lie in [0, 1)");
  }
  if (!(scale_min > 0.0 && scale_max >= scale_min)) {
    invalid("scale_range", "must be a positive interval");
  }
  if (!(noise_sigma >= 0.0)) invalid("noise_sigma", "must be non-negative");
  if (!(n_p_fraction > 0.0 && n_p_fraction <= 1.0)) {
    invalid("n_p_fraction", "must lie in (0, 1]");
  }
  const bool planar = point_dim(kind) == 2;
  if (rotation == RotationRule::kFullCircle2d && !planar) {
    invalid("rotation", "full-circle rotation needs a 2D model kind");
  }
  if (rotation == RotationRule::kZAxis3d && kind != ModelKind::kZrotScale3d) {
    invalid("rotation", "z-axis rotation is only representable by zrot-scale3d");
  }
  if (prototype_shape(shape, n_points).dim() != point_dim(kind)) {
    invalid("shape", "shape '" + shape + "' does not match the dimension of " +
                         std::string(to_string(kind)));
  }
}

Trial generate_trial(const TrialSpec& spec) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  const PointSet proto = prototype_shape(spec.shape, spec.n_points);
  const int n = proto.size();
  const int dim = proto.dim();
  const double diam = diameter(proto);
  const double sigma = spec.noise_sigma * diam;

  // Forward map prototype -> model: x = a p + t.
  const double angle = spec.rotation == RotationRule::kNone ? 0.0 : 2.0 * kPi * unit(rng);
  const auto scale = [&] { return spec.scale_min + (spec.scale_max - spec.scale_min) * unit(rng); };
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(dim, dim);
  switch (spec.kind) {
    case ModelKind::kSimilarity2d:
    case ModelKind::kAffine2d: a = scale() * rotation_2d(angle); break;
    case ModelKind::kScaleTranslate3d:
      for (int c = 0; c < 3; ++c) a(c, c) = scale();
      break;
    case ModelKind::kZrotScale3d: {
      const double s = scale();
      a.topLeftCorner(2, 2) = s * rotation_2d(angle);
      a(2, 2) = scale();
      break;
    }
  }
  Eigen::VectorXd t(dim);
  for (int c = 0; c < dim; ++c) t(c) = (unit(rng) - 0.5) * diam;

  // Occlusion: drop the points furthest along a random direction.
  Eigen::VectorXd w(dim);
  for (int c = 0; c < dim; ++c) w(c) = gauss(rng);
  w.normalize();
  const Eigen::VectorXd proj = proto.matrix() * w;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int l, int r) { return proj(l) > proj(r); });
  const int removed = static_cast<int>(std::lround(spec.occlusion_fraction * n));
  std::vector<int> inliers(order.begin() + removed, order.end());
  std::sort(inliers.begin(), inliers.end());
  const int min_np = ReducedObjective::min_matches(spec.kind);
  if (static_cast<int>(inliers.size()) < min_np) {
    invalid("occlusion_fraction", "leaves " + std::to_string(inliers.size()) +
                                      " inliers, need at least " + std::to_string(min_np));
  }

  // Scene: noisy prototype plus outliers in the inflated bounding box.
  const Eigen::VectorXd lo = proto.matrix().colwise().minCoeff().transpose();
  const Eigen::VectorXd hi = proto.matrix().colwise().maxCoeff().transpose();
  const Eigen::VectorXd centre = 0.5 * (lo + hi);
  const Eigen::VectorXd half = 0.5 * (hi - lo);
  Trial trial;
  trial.outlier_box_min = centre - 1.5 * half;
  trial.outlier_box_max = centre + 1.5 * half;
  const int ny = n + spec.n_outliers;
  Eigen::MatrixXd scene_raw(ny, dim);
  for (int i = 0; i < n; ++i) {
    for (int c = 0; c < dim; ++c) scene_raw(i, c) = proto.matrix()(i, c) + sigma * gauss(rng);
  }
  for (int i = n; i < ny; ++i) {
    for (int c = 0; c < dim; ++c) {
      scene_raw(i, c) = trial.outlier_box_min(c) +
                        (trial.outlier_box_max(c) - trial.outlier_box_min(c)) * unit(rng);
    }
  }

  const double mean_scale = std::pow(std::abs(a.determinant()), 1.0 / dim);
  const int nx = static_cast<int>(inliers.size());
  Eigen::MatrixXd model_raw(nx, dim);
  for (int k = 0; k < nx; ++k) {
    const Eigen::VectorXd p = proto.point(inliers[static_cast<std::size_t>(k)]);
    Eigen::VectorXd x = a * p + t;
    for (int c = 0; c < dim; ++c) x(c) += sigma * mean_scale * gauss(rng);
    model_raw.row(k) = x.transpose();
  }

  std::vector<int> scene_perm(static_cast<std::size_t>(ny));
  std::iota(scene_perm.begin(), scene_perm.end(), 0);
  std::shuffle(scene_perm.begin(), scene_perm.end(), rng);
  std::vector<int> model_perm(static_cast<std::size_t>(nx));
  std::iota(model_perm.begin(), model_perm.end(), 0);
  std::shuffle(model_perm.begin(), model_perm.end(), rng);

  // scene_perm[new] = old; invert for lookup.
  std::vector<int> scene_pos(static_cast<std::size_t>(ny));
  Eigen::MatrixXd scene(ny, dim);
  for (int k = 0; k < ny; ++k) {
    scene.row(k) = scene_raw.row(scene_perm[static_cast<std::size_t>(k)]);
    scene_pos[static_cast<std::size_t>(scene_perm[static_cast<std::size_t>(k)])] = k;
  }
  Eigen::MatrixXd model(nx, dim);
  for (int k = 0; k < nx; ++k) {
    const int src = model_perm[static_cast<std::size_t>(k)];
    model.row(k) = model_raw.row(src);
    const int proto_index = inliers[static_cast<std::size_t>(src)];
    trial.truth.pairs.push_back({k, scene_pos[static_cast<std::size_t>(proto_index)]});
  }
  trial.model = PointSet(std::move(model));
  trial.scene = PointSet(std::move(scene));

  const Eigen::MatrixXd b = a.inverse();
  trial.truth_phi = encode_phi(spec.kind, b, -b * t);
  trial.diameter = diam;
  trial.n_p = std::clamp(static_cast<int>(std::floor(spec.n_p_fraction * nx)), min_np,
                         std::min(nx, ny));
  return trial;
}

double rms_error(const Eigen::VectorXd& phi, ModelKind kind,
                 const CorrespondenceVector& pairs, const PointSet& model,
                 const PointSet& scene) {
  if (pairs.pairs.empty()) throw Error(ErrorCode::kInput, "no inlier pairs");
  const double e = residual_energy(kind, phi, model, scene, pairs);
  return std::sqrt(e / (static_cast<double>(pairs.size()) * point_dim(kind)));
}

TrialResult run_trial(int trial_id, const TrialSpec& spec, const SolverConfig& config) {
  TrialResult out;
  out.trial_id = trial_id;
  out.shape = spec.shape;
  out.n_outliers = spec.n_outliers;
  out.occlusion_fraction = spec.occlusion_fraction;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out.rms_error = nan;
  out.energy = nan;
  try {
    const Trial trial = generate_trial(spec);
    out.n_p = trial.n_p;
    out.diameter = trial.diameter;
    const auto start = std::chrono::steady_clock::now();
    const SolverResult res =
        run_inner_approximation(trial.model, trial.scene, spec.kind, trial.n_p, config);
    out.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.rms_error = rms_error(res.phi, spec.kind, trial.truth, trial.model, trial.scene);
    out.energy = res.energy;
    out.iterations = res.iterations;
    out.status = std::string(to_string(res.status));
  } catch (const Error& e) {
    out.status = std::string(to_string(e.code()));
    logger().warn("trial {} failed: {}", trial_id, e.what());
  }
  return out;
}

SuiteReport run_suite(const std::vector<TrialSpec>& specs, const SolverConfig& config,
                      int jobs) {
  SuiteReport report;
  report.results.resize(specs.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < specs.size(); i = next++) {
      report.results[i] = run_trial(static_cast<int>(i), specs[i], config);
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(specs.size())));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  report.summary = summarize(report.results);
  return report;
}

SuiteSummary summarize(const std::vector<TrialResult>& results) {
  SuiteSummary s;
  s.trials = static_cast<int>(results.size());
  std::vector<double> errors;
  std::vector<double> runtimes;
  for (const auto& r : results) {
    if (r.status == "Converged") ++s.converged;
    if (!std::isfinite(r.rms_error)) continue;
    ++s.completed;
    errors.push_back(r.rms_error);
    runtimes.push_back(r.runtime_seconds);
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const auto mean = [&](const std::vector<double>& v) {
    // Sum in sorted order so the result does not depend on trial order.
    std::vector<double> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    return v.empty() ? nan : std::accumulate(sorted.begin(), sorted.end(), 0.0) / v.size();
  };
  s.mean_rms_error = mean(errors);
  s.median_rms_error = median(errors);
  s.mean_runtime_seconds = mean(runtimes);
  s.median_runtime_seconds = median(runtimes);
  return s;
}

std::uint64_t trial_seed(std::uint64_t suite_seed, std::uint64_t index) {
  return splitmix64(splitmix64(suite_seed) ^ (index + 1));
}

void write_trials_csv(std::ostream& out, const std::vector<TrialResult>& results) {
  out << "trial_id,shape,n_outliers,occlusion_fraction,n_p,rms_error,energy,"
         "iterations,runtime_seconds,status\n";
  const auto old_precision = out.precision();
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (const auto& r : results) {
    out << r.trial_id << ',' << r.shape << ',' << r.n_outliers << ','
        << r.occlusion_fraction << ',' << r.n_p << ',' << r.rms_error << ','
        << r.energy << ',' << r.iterations << ',' << r.runtime_seconds << ','
        << r.status << '\n';
  }
  out.precision(old_precision);
}

std::vector<TrialResult> read_trials_csv(std::istream& in) {
  std::vector<TrialResult> out;
  std::string line;
  if (!std::getline(in, line)) return out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (f.size() != 10) throw Error(ErrorCode::kInput, "malformed trial row: " + line);
    TrialResult r;
    r.trial_id = std::stoi(f[0]);
    r.shape = f[1];
    r.n_outliers = std::stoi(f[2]);
    r.occlusion_fraction = std::stod(f[3]);
    r.n_p = std::stoi(f[4]);
    r.rms_error = std::strtod(f[5].c_str(), nullptr);
    r.energy = std::strtod(f[6].c_str(), nullptr);
    r.iterations = std::stoi(f[7]);
    r.runtime_seconds = std::stod(f[8]);
    r.status = f[9];
    out.push_back(std::move(r));
  }
  return out;
}

std::string summary_json(const SuiteSummary& s) {
  const auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json j;
  j["trials"] = s.trials;
  j["completed"] = s.completed;
  j["converged"] = s.converged;
  j["mean_rms_error"] = num(s.mean_rms_error);
  j["median_rms_error"] = num(s.median_rms_error);
  j["mean_runtime_seconds"] = num(s.mean_runtime_seconds);
  j["median_runtime_seconds"] = num(s.median_runtime_seconds);
  j["rms_normalization"] = "per_coordinate";
  return j.dump(2);
}

}  // namespace iarpm
