#include "iarpm/cli.hpp"
#include "iarpm/errors.hpp"
#include "iarpm/io.hpp"
#include "iarpm/objective.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace iarpm;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "iarpm_cli_tests";
  fs::create_directories(dir);
  return dir / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

}  // namespace

TEST(Cli, ResolveNp) {
  EXPECT_EQ(resolve_np(0.9, 30, 40), 27);
  EXPECT_EQ(resolve_np(10, 30, 40), 10);
  EXPECT_EQ(resolve_np(0.5, 7, 9), 3);
  EXPECT_THROW(resolve_np(2.5, 30, 40), Error);
  EXPECT_THROW(resolve_np(31, 30, 40), Error);
  EXPECT_THROW(resolve_np(-1, 30, 40), Error);
}

TEST(Cli, RegisterIdenticalFiles) {
  std::mt19937_64 rng(51);
  const PointSet x = oracle::random_points(rng, 10, 2);
  const auto pts = scratch("same.txt");
  write_point_file(pts.string(), x);
  RegistrationRequest req;
  req.model_path = req.scene_path = pts.string();
  req.n_p = 10;
  req.output_path = scratch("same.json").string();
  std::stringstream err;
  ASSERT_EQ(cmd_register(req, err), 0) << err.str();
  const auto j = nlohmann::json::parse(slurp(req.output_path));
  EXPECT_EQ(j["status"], "Converged");
  EXPECT_EQ(j["index_base"], 0);
  EXPECT_NEAR(j["energy"].get<double>(), 0.0, 1e-9);
  ASSERT_EQ(j["matches"].size(), 10u);
  for (const auto& m : j["matches"]) EXPECT_EQ(m[0], m[1]);
  EXPECT_EQ(j["config"]["n_p"], 10);
}

TEST(Cli, ResultRoundTripReproducesEnergy) {
  std::mt19937_64 rng(52);
  const PointSet x = oracle::random_points(rng, 8, 2);
  const PointSet y = oracle::random_points(rng, 9, 2);
  const auto mp = scratch("rt_model.txt");
  const auto sp = scratch("rt_scene.txt");
  write_point_file(mp.string(), x);
  write_point_file(sp.string(), y);
  RegistrationRequest req;
  req.model_path = mp.string();
  req.scene_path = sp.string();
  req.n_p = 0.5;
  req.output_path = scratch("rt.json").string();
  std::stringstream err;
  const int code = cmd_register(req, err);
  ASSERT_TRUE(code == 0 || code == 2) << err.str();
  const auto j = nlohmann::json::parse(slurp(req.output_path));
  CorrespondenceVector c;
  for (const auto& m : j["matches"]) c.pairs.push_back({m[0].get<int>(), m[1].get<int>()});
  ASSERT_EQ(c.size(), 4);
  Eigen::VectorXd phi(4);
  for (int i = 0; i < 4; ++i) phi(i) = j["phi"][static_cast<std::size_t>(i)].get<double>();
  const ReducedObjective red(x, y, ModelKind::kSimilarity2d, 4);
  const double e = red.energy_p(c);
  EXPECT_NEAR(e, j["energy"].get<double>(), 1e-9 * (1.0 + e));
  EXPECT_NEAR(residual_energy(ModelKind::kSimilarity2d, phi, x, y, c), e, 1e-9 * (1.0 + e));
}

TEST(Cli, RegisterDimensionMismatch) {
  std::mt19937_64 rng(53);
  const auto pts = scratch("flat.txt");
  write_point_file(pts.string(), oracle::random_points(rng, 6, 2));
  RegistrationRequest req;
  req.model_path = req.scene_path = pts.string();
  req.kind = ModelKind::kScaleTranslate3d;
  req.n_p = 4;
  std::stringstream err;
  EXPECT_EQ(cmd_register(req, err), 1);
  EXPECT_NE(err.str().find("dimension"), std::string::npos);
}

TEST(Cli, RegisterMissingFile) {
  RegistrationRequest req;
  req.model_path = req.scene_path = "/nonexistent.txt";
  std::stringstream err;
  EXPECT_EQ(cmd_register(req, err), 1);
}

TEST(Cli, LapPrintsPairsAndChecksOracle) {
  const auto p = scratch("lap.csv");
  write_text(p, "1,0\n0,1\n");
  std::stringstream out;
  std::stringstream err;
  ASSERT_EQ(cmd_lap(p.string(), 2, out, err), 0);
  EXPECT_NE(out.str().find("0 0\n1 1\nvalue 2"), std::string::npos);
  EXPECT_NE(out.str().find("agree"), std::string::npos);
  EXPECT_EQ(cmd_lap(p.string(), 3, out, err), 1);
  EXPECT_NE(err.str().find("InfeasibleCardinality"), std::string::npos);
  write_text(p, "1,x\n0,1\n");
  EXPECT_EQ(cmd_lap(p.string(), 1, out, err), 1);
}

TEST(Cli, BenchConfigParsing) {
  const BenchConfig cfg = parse_bench_config(R"({
    "seed": 4, "solver": {"eps0": 0.2, "max_iterations": 50},
    "trials": [{"shape": "star", "n_outliers": 2, "repeat": 3},
               {"shape": "helix", "kind": "zrot-scale3d", "seed": 10}]})");
  EXPECT_EQ(cfg.solver.eps0, 0.2);
  EXPECT_EQ(cfg.solver.max_iterations, 50);
  ASSERT_EQ(cfg.trials.size(), 4u);
  EXPECT_EQ(cfg.trials[1].shape, "star");
  EXPECT_NE(cfg.trials[0].seed, cfg.trials[1].seed);
  EXPECT_EQ(cfg.trials[3].seed, 10u);
  EXPECT_EQ(cfg.trials[3].rotation, RotationRule::kZAxis3d);
}

TEST(Cli, BenchConfigFieldErrors) {
  const auto message = [](const std::string& text) {
    try {
      parse_bench_config(text);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kInvalidSpec);
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("{not json").find("malformed"), std::string::npos);
  EXPECT_NE(message(R"({"trials": [{"shaep": "star"}]})").find("trials[0].shaep"),
            std::string::npos);
  EXPECT_NE(message(R"({"trials": [{"n_outliers": "many"}]})").find("n_outliers"),
            std::string::npos);
  EXPECT_NE(message(R"({"trials": [{"occlusion_fraction": 1.5}]})").find("occlusion_fraction"),
            std::string::npos);
  EXPECT_NE(message(R"({"solver": {"eps0": -1}})").find("eps0"), std::string::npos);
}

TEST(Cli, BenchEmptyAndDeterministic) {
  const auto cfg = scratch("empty.json");
  write_text(cfg, R"({"trials": []})");
  const auto out = scratch("bench_empty");
  std::stringstream err;
  ASSERT_EQ(cmd_bench(cfg.string(), out.string(), 1, err), 0) << err.str();
  EXPECT_EQ(slurp(out / "trials.csv"),
            "trial_id,shape,n_outliers,occlusion_fraction,n_p,rms_error,energy,iterations,"
            "runtime_seconds,status\n");

  const auto cfg2 = scratch("two.json");
  write_text(cfg2, R"({"seed": 3, "trials": [{"n_points": 12, "n_outliers": 2, "repeat": 2}]})");
  ASSERT_EQ(cmd_bench(cfg2.string(), scratch("b1").string(), 2, err), 0);
  ASSERT_EQ(cmd_bench(cfg2.string(), scratch("b2").string(), 1, err), 0);
  // Everything but the runtime column is reproducible.
  const auto strip_runtime = [](const std::string& csv) {
    std::stringstream in(csv);
    std::string line;
    std::string out;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::stringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      cells.erase(cells.begin() + 8);
      for (const auto& c : cells) out += c + ",";
      out += "\n";
    }
    return out;
  };
  EXPECT_EQ(strip_runtime(slurp(scratch("b1") / "trials.csv")),
            strip_runtime(slurp(scratch("b2") / "trials.csv")));

  write_text(cfg, "{");
  EXPECT_EQ(cmd_bench(cfg.string(), out.string(), 1, err), 1);
}

TEST(Cli, RunCliDispatch) {
  const char* help[] = {"iarpm", "--help"};
  EXPECT_EQ(run_cli(2, help), 0);
  const char* none[] = {"iarpm"};
  EXPECT_EQ(run_cli(1, none), 1);
  const auto p = scratch("dispatch.csv");
  write_text(p, "3 1\n1 3\n");
  const std::string path = p.string();
  const char* lap[] = {"iarpm", "lap", path.c_str(), "2"};
  EXPECT_EQ(run_cli(4, lap), 0);
  const char* bad_kind[] = {"iarpm", "register", "--model", path.c_str(), "--scene",
                            path.c_str(), "--kind", "rigid"};
  EXPECT_EQ(run_cli(8, bad_kind), 1);
}
