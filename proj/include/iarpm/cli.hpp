#pragma once

#include "iarpm/bench.hpp"
#include "iarpm/solver.hpp"
#include "iarpm/transform_models.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace iarpm {

struct RegistrationRequest {
  std::string model_path;
  std::string scene_path;
  ModelKind kind = ModelKind::kSimilarity2d;
  /// Values below 1 are a fraction of min(n_x, n_y); otherwise an absolute count.
  double n_p = 0.9;
  double eps0 = 0.3;
  int max_iterations = 10000;
  std::string output_path;
  std::uint64_t seed = 0;
};

/// floor(n_p * min(n_x, n_y)) for n_p < 1, else n_p itself (must be integral).
int resolve_np(double n_p, int nx, int ny);

/// Returns 0 on Converged, 2 on IterationCap, 1 otherwise. The result JSON is
/// written whenever the solver returned.
int cmd_register(const RegistrationRequest& req, std::ostream& err);

struct BenchConfig {
  SolverConfig solver;
  std::vector<TrialSpec> trials;
};

/// Parses a suite configuration. Throws Error(kInvalidSpec) naming the field.
BenchConfig parse_bench_config(const std::string& json_text);

int cmd_bench(const std::string& config_path, const std::string& output_dir, int jobs,
              std::ostream& err);

int cmd_lap(const std::string& cost_path, int k, std::ostream& out, std::ostream& err);

/// Entry point shared by the executable and tests.
int run_cli(int argc, const char* const* argv);

}  // namespace iarpm
