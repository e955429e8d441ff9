#include "iarpm/cli.hpp"

#include "iarpm/assignment.hpp"
#include "iarpm/errors.hpp"
#include "iarpm/io.hpp"
#include "iarpm/log.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace iarpm {

using nlohmann::json;

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kInput, "cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

[[noreturn]] void bad_field(const std::string& where, const std::string& why) {
  throw Error(ErrorCode::kInvalidSpec, where + ": " + why);
}

template <typename T>
T get_field(const json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    bad_field(where + "." + key, "wrong type");
  }
}

TrialSpec parse_trial(const json& t, const std::string& where) {
  static const std::set<std::string> known = {
      "shape", "kind", "n_points", "n_outliers", "occlusion_fraction", "rotation",
      "scale_range", "noise_sigma", "seed", "n_p_fraction", "repeat"};
  if (!t.is_object()) bad_field(where, "expected an object");
  for (const auto& item : t.items()) {
    if (!known.count(item.key())) bad_field(where + "." + item.key(), "unknown field");
  }
  TrialSpec spec;
  spec.shape = get_field<std::string>(t, "shape", where, spec.shape);
  const auto kind_name = get_field<std::string>(t, "kind", where, "similarity2d");
  const auto kind = parse_model_kind(kind_name);
  if (!kind) bad_field(where + ".kind", "unknown model kind '" + kind_name + "'");
  spec.kind = *kind;
  spec.rotation = default_rotation(spec.kind);
  if (t.contains("rotation")) {
    try {
      spec.rotation = parse_rotation_rule(get_field<std::string>(t, "rotation", where, ""));
    } catch (const Error& e) {
      bad_field(where + ".rotation", e.what());
    }
  }
  spec.n_points = get_field<int>(t, "n_points", where, spec.n_points);
  spec.n_outliers = get_field<int>(t, "n_outliers", where, spec.n_outliers);
  spec.occlusion_fraction =
      get_field<double>(t, "occlusion_fraction", where, spec.occlusion_fraction);
  if (t.contains("scale_range")) {
    const auto range = get_field<std::vector<double>>(t, "scale_range", where, {});
    if (range.size() != 2) bad_field(where + ".scale_range", "expected [min, max]");
    spec.scale_min = range[0];
    spec.scale_max = range[1];
  }
  spec.noise_sigma = get_field<double>(t, "noise_sigma", where, spec.noise_sigma);
  spec.n_p_fraction = get_field<double>(t, "n_p_fraction", where, spec.n_p_fraction);
  try {
    spec.validate();
  } catch (const Error& e) {
    bad_field(where, e.what());
  }
  return spec;
}

json result_json(const RegistrationRequest& req, int n_p, const SolverResult& res,
                 double runtime) {
  json matches = json::array();
  for (const auto& m : res.correspondence.pairs) matches.push_back({m.model, m.scene});
  json phi = json::array();
  for (Eigen::Index i = 0; i < res.phi.size(); ++i) phi.push_back(res.phi(i));
  json j;
  j["index_base"] = 0;
  j["matches"] = matches;
  j["phi"] = phi;
  j["energy"] = res.energy;
  j["certificate_eps"] = finite_or_null(res.certificate_eps);
  j["iterations"] = res.iterations;
  j["runtime_seconds"] = runtime;
  j["status"] = std::string(to_string(res.status));
  j["n_u"] = res.nu;
  j["config"] = {{"model", req.model_path}, {"scene", req.scene_path},
                 {"kind", std::string(to_string(req.kind))}, {"n_p_requested", req.n_p},
                 {"n_p", n_p}, {"eps0", req.eps0},
                 {"max_iterations", req.max_iterations}, {"seed", req.seed}};
  return j;
}

}  // namespace

int resolve_np(double n_p, int nx, int ny) {
  if (!(n_p > 0.0) || !std::isfinite(n_p)) {
    throw Error(ErrorCode::kInput, "n_p must be positive");
  }
  if (n_p < 1.0) return static_cast<int>(std::floor(n_p * std::min(nx, ny)));
  if (n_p != std::floor(n_p)) {
    throw Error(ErrorCode::kInput, "n_p >= 1 must be an integer count");
  }
  if (n_p > std::min(nx, ny)) {
    throw Error(ErrorCode::kInfeasibleCardinality,
                "n_p exceeds min(n_x, n_y) = " + std::to_string(std::min(nx, ny)));
  }
  return static_cast<int>(n_p);
}

int cmd_register(const RegistrationRequest& req, std::ostream& err) {
  try {
    const PointSet model = read_point_file(req.model_path);
    const PointSet scene = read_point_file(req.scene_path);
    const int dim = point_dim(req.kind);
    if (model.dim() != dim || scene.dim() != dim) {
      throw Error(ErrorCode::kInput,
                  "dimension mismatch: " + std::string(to_string(req.kind)) + " needs " +
                      std::to_string(dim) + "D points, got model " +
                      std::to_string(model.dim()) + "D and scene " +
                      std::to_string(scene.dim()) + "D");
    }
    const int n_p = resolve_np(req.n_p, model.size(), scene.size());
    SolverConfig config;
    config.eps0 = req.eps0;
    config.max_iterations = req.max_iterations;
    config.rng_seed = req.seed;
    const auto start = std::chrono::steady_clock::now();
    const SolverResult res = run_inner_approximation(model, scene, req.kind, n_p, config);
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const json j = result_json(req, n_p, res, runtime);
    if (req.output_path.empty()) {
      std::cout << j.dump(2) << '\n';
    } else {
      std::ofstream out(req.output_path);
      if (!out) throw Error(ErrorCode::kInput, "cannot write '" + req.output_path + "'");
      out << j.dump(2) << '\n';
    }
    switch (res.status) {
      case SolverStatus::kConverged: return 0;
      case SolverStatus::kIterationCap: return 2;
      case SolverStatus::kDegenerate:
        err << "error: solver stopped on a degenerate geometry; best correspondence written\n";
        return 1;
    }
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

BenchConfig parse_bench_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidSpec, std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) bad_field("config", "expected an object");
  for (const auto& item : root.items()) {
    if (item.key() != "seed" && item.key() != "solver" && item.key() != "trials") {
      bad_field("config." + item.key(), "unknown field");
    }
  }
  BenchConfig cfg;
  const auto suite_seed = get_field<std::uint64_t>(root, "seed", "config", 0);
  if (root.contains("solver")) {
    const json& s = root.at("solver");
    if (!s.is_object()) bad_field("config.solver", "expected an object");
    for (const auto& item : s.items()) {
      if (item.key() != "eps0" && item.key() != "max_iterations") {
        bad_field("config.solver." + item.key(), "unknown field");
      }
    }
    cfg.solver.eps0 = get_field<double>(s, "eps0", "config.solver", cfg.solver.eps0);
    cfg.solver.max_iterations =
        get_field<int>(s, "max_iterations", "config.solver", cfg.solver.max_iterations);
    if (!(cfg.solver.eps0 > 0.0)) bad_field("config.solver.eps0", "must be positive");
    if (cfg.solver.max_iterations < 1) {
      bad_field("config.solver.max_iterations", "must be at least 1");
    }
  }
  if (!root.contains("trials")) return cfg;
  const json& trials = root.at("trials");
  if (!trials.is_array()) bad_field("config.trials", "expected an array");
  for (std::size_t t = 0; t < trials.size(); ++t) {
    const std::string where = "config.trials[" + std::to_string(t) + "]";
    const TrialSpec base = parse_trial(trials[t], where);
    const int repeat = get_field<int>(trials[t], "repeat", where, 1);
    if (repeat < 0) bad_field(where + ".repeat", "must be non-negative");
    const bool explicit_seed = trials[t].contains("seed");
    const auto seed0 = get_field<std::uint64_t>(trials[t], "seed", where, 0);
    for (int r = 0; r < repeat; ++r) {
      TrialSpec spec = base;
      spec.seed = explicit_seed ? seed0 + static_cast<std::uint64_t>(r)
                                : trial_seed(suite_seed, cfg.trials.size());
      cfg.trials.push_back(spec);
    }
  }
  return cfg;
}

int cmd_bench(const std::string& config_path, const std::string& output_dir, int jobs,
              std::ostream& err) {
  try {
    const BenchConfig cfg = parse_bench_config(read_text(config_path));
    std::filesystem::create_directories(output_dir);
    const SuiteReport report = run_suite(cfg.trials, cfg.solver, jobs);
    const auto dir = std::filesystem::path(output_dir);
    std::ofstream csv(dir / "trials.csv");
    std::ofstream summary(dir / "summary.json");
    if (!csv || !summary) throw Error(ErrorCode::kInput, "cannot write into '" + output_dir + "'");
    write_trials_csv(csv, report.results);
    summary << summary_json(report.summary) << '\n';
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int cmd_lap(const std::string& cost_path, int k, std::ostream& out, std::ostream& err) {
  try {
    AssignmentProblem prob{read_matrix_file(cost_path), k};
    const AssignmentSolution sol = max_kcard_assignment(prob);
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (const auto& m : sol.pairs.pairs) out << m.model << ' ' << m.scene << '\n';
    out << "value " << sol.value << '\n';
    if (prob.cost.rows() <= 8 && prob.cost.cols() <= 8) {
      const AssignmentSolution oracle = brute_force_assignment(prob);
      const bool agree = oracle.value == sol.value;
      out << "oracle " << oracle.value << (agree ? " agree" : " DISAGREE") << '\n';
      if (!agree) return 1;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

int run_cli(int argc, const char* const* argv) {
  configure_logging_from_env();
  CLI::App app{"Globally optimal point-set registration by inner approximation"};
  app.require_subcommand(1);

  RegistrationRequest req;
  std::string kind_name = "similarity2d";
  auto* reg = app.add_subcommand("register", "Register a model point set to a scene");
  reg->add_option("--model", req.model_path, "Model point file")->required();
  reg->add_option("--scene", req.scene_path, "Scene point file")->required();
  reg->add_option("--kind", kind_name,
                  "similarity2d | affine2d | scale-translate3d | zrot-scale3d")
      ->capture_default_str();
  reg->add_option("--np", req.n_p, "Match count, or fraction of min(n_x, n_y) if < 1")
      ->capture_default_str();
  reg->add_option("--eps0", req.eps0, "Per-dimension tolerance")->capture_default_str();
  reg->add_option("--max-iters", req.max_iterations, "Iteration cap")->capture_default_str();
  reg->add_option("--seed", req.seed, "Seed for fallback directions")->capture_default_str();
  reg->add_option("--out", req.output_path, "Result JSON path (stdout if omitted)");

  std::string config_path;
  std::string out_dir = "bench_out";
  int jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto* bench = app.add_subcommand("bench", "Run a synthetic benchmark suite");
  bench->add_option("config", config_path, "Suite configuration JSON")->required();
  bench->add_option("--out", out_dir, "Output directory")->capture_default_str();
  bench->add_option("--jobs", jobs, "Worker threads")->capture_default_str();

  std::string cost_path;
  int k = 0;
  auto* lap = app.add_subcommand("lap", "Solve a k-cardinality assignment (maximization)");
  lap->add_option("cost", cost_path, "Cost matrix CSV")->required();
  lap->add_option("k", k, "Number of matches")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*reg) {
    const auto kind = parse_model_kind(kind_name);
    if (!kind) {
      std::cerr << "error: unknown model kind '" << kind_name << "'\n";
      return 1;
    }
    req.kind = *kind;
    return cmd_register(req, std::cerr);
  }
  if (*bench) return cmd_bench(config_path, out_dir, jobs, std::cerr);
  return cmd_lap(cost_path, k, std::cout, std::cerr);
}

}  // namespace iarpm
