#include "iarpm/assignment.hpp"
#include "iarpm/bench.hpp"
#include "iarpm/cli.hpp"
#include "iarpm/errors.hpp"
#include "iarpm/solver.hpp"
#include "iarpm/transform_models.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <chrono>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace py = pybind11;
using namespace iarpm;

namespace {

using Pairs = std::vector<std::pair<int, int>>;

ModelKind kind_from(const std::string& name) {
  const auto kind = parse_model_kind(name);
  if (!kind) throw Error(ErrorCode::kInput, "unknown model kind '" + name + "'");
  return *kind;
}

CorrespondenceVector corr_from(const Pairs& pairs) {
  CorrespondenceVector c;
  for (const auto& [i, j] : pairs) c.pairs.push_back({i, j});
  return c;
}

Pairs pairs_from(const CorrespondenceVector& c) {
  Pairs out;
  for (const auto& m : c.pairs) out.emplace_back(m.model, m.scene);
  return out;
}

py::dict solution_dict(const AssignmentSolution& s) {
  py::dict d;
  d["pairs"] = pairs_from(s.pairs);
  d["value"] = s.value;
  return d;
}

py::dict result_dict(const SolverResult& r, int n_p, double runtime) {
  py::dict d;
  d["matches"] = pairs_from(r.correspondence);
  d["phi"] = r.phi;
  d["energy"] = r.energy;
  d["certificate_eps"] = r.certificate_eps;
  d["iterations"] = r.iterations;
  d["n_u"] = r.nu;
  d["n_p"] = n_p;
  d["status"] = std::string(to_string(r.status));
  d["runtime_seconds"] = runtime;
  return d;
}

}  // namespace

PYBIND11_MODULE(_iarpm, m) {
  m.doc() = "Globally optimal point-set registration by inner approximation";

  static py::exception<Error> error_type(m, "IarpmError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error_type, e.what());
    }
  });

  m.def("model_kinds", [] {
    std::vector<std::string> out;
    for (ModelKind k : {ModelKind::kSimilarity2d, ModelKind::kAffine2d,
                        ModelKind::kScaleTranslate3d, ModelKind::kZrotScale3d}) {
      out.emplace_back(to_string(k));
    }
    return out;
  });
  m.def("shape_names", &shape_names);

  m.def(
      "register",
      [](const Eigen::MatrixXd& model, const Eigen::MatrixXd& scene, const std::string& kind,
         double n_p, double eps0, int max_iterations, std::uint64_t seed) {
        const PointSet x(model);
        const PointSet y(scene);
        const int np = resolve_np(n_p, x.size(), y.size());
        SolverConfig cfg;
        cfg.eps0 = eps0;
        cfg.max_iterations = max_iterations;
        cfg.rng_seed = seed;
        SolverResult r;
        const auto start = std::chrono::steady_clock::now();
        {
          py::gil_scoped_release release;
          r = run_inner_approximation(x, y, kind_from(kind), np, cfg);
        }
        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return result_dict(r, np, secs);
      },
      py::arg("model"), py::arg("scene"), py::arg("kind") = "similarity2d",
      py::arg("n_p") = 0.9, py::arg("eps0") = 0.3, py::arg("max_iterations") = 10000,
      py::arg("seed") = 0,
      "Register model onto scene; n_p below 1 is a fraction of min(n_x, n_y).");

  m.def(
      "brute_force_register",
      [](const Eigen::MatrixXd& model, const Eigen::MatrixXd& scene, const std::string& kind,
         int n_p) {
        const SolverResult r =
            brute_force_register(PointSet(model), PointSet(scene), kind_from(kind), n_p);
        return result_dict(r, n_p, 0.0);
      },
      py::arg("model"), py::arg("scene"), py::arg("kind"), py::arg("n_p"));

  m.def(
      "max_kcard_assignment",
      [](const Eigen::MatrixXd& cost, int k) { return solution_dict(max_kcard_assignment({cost, k})); },
      py::arg("cost"), py::arg("k"));
  m.def(
      "brute_force_assignment",
      [](const Eigen::MatrixXd& cost, int k) {
        return solution_dict(brute_force_assignment({cost, k}));
      },
      py::arg("cost"), py::arg("k"));

  m.def(
      "solve_phi",
      [](const std::string& kind, const Eigen::MatrixXd& model, const Eigen::MatrixXd& scene,
         const Pairs& pairs) {
        return solve_phi(kind_from(kind), PointSet(model), PointSet(scene), corr_from(pairs));
      },
      py::arg("kind"), py::arg("model"), py::arg("scene"), py::arg("pairs"));
  m.def(
      "residual_energy",
      [](const std::string& kind, const Eigen::VectorXd& phi, const Eigen::MatrixXd& model,
         const Eigen::MatrixXd& scene, const Pairs& pairs) {
        return residual_energy(kind_from(kind), phi, PointSet(model), PointSet(scene),
                               corr_from(pairs));
      },
      py::arg("kind"), py::arg("phi"), py::arg("model"), py::arg("scene"), py::arg("pairs"));
  m.def(
      "rms_error",
      [](const std::string& kind, const Eigen::VectorXd& phi, const Eigen::MatrixXd& model,
         const Eigen::MatrixXd& scene, const Pairs& pairs) {
        return rms_error(phi, kind_from(kind), corr_from(pairs), PointSet(model), PointSet(scene));
      },
      py::arg("kind"), py::arg("phi"), py::arg("model"), py::arg("scene"), py::arg("pairs"));

  m.def(
      "generate_trial",
      [](const std::string& shape, const std::string& kind, int n_points, int n_outliers,
         double occlusion_fraction, double noise_sigma, double n_p_fraction, std::uint64_t seed) {
        TrialSpec spec;
        spec.shape = shape;
        spec.kind = kind_from(kind);
        spec.rotation = default_rotation(spec.kind);
        spec.n_points = n_points;
        spec.n_outliers = n_outliers;
        spec.occlusion_fraction = occlusion_fraction;
        spec.noise_sigma = noise_sigma;
        spec.n_p_fraction = n_p_fraction;
        spec.seed = seed;
        const Trial t = generate_trial(spec);
        py::dict d;
        d["model"] = t.model.matrix();
        d["scene"] = t.scene.matrix();
        d["truth"] = pairs_from(t.truth);
        d["truth_phi"] = t.truth_phi;
        d["diameter"] = t.diameter;
        d["n_p"] = t.n_p;
        return d;
      },
      py::arg("shape") = "spiral", py::arg("kind") = "similarity2d", py::arg("n_points") = 0,
      py::arg("n_outliers") = 0, py::arg("occlusion_fraction") = 0.0,
      py::arg("noise_sigma") = 0.01, py::arg("n_p_fraction") = 1.0, py::arg("seed") = 0);
}
