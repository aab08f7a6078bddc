#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "p1fv/cli.hpp"
#include "p1fv/error.hpp"
#include "support.hpp"

using namespace p1fv;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("p1fv_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

template <class E>
std::string error_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const E& e) {
    return e.what();
  }
  ADD_FAILURE() << "no exception for:\n" << text;
  return {};
}

}  // namespace

TEST(ParseConfig, Defaults) {
  const RunConfig cfg = parse_config("");
  EXPECT_EQ(cfg.mesh_kind, MeshKind::Rectangle);
  EXPECT_EQ(cfg.nx, 16u);
  EXPECT_EQ(cfg.ny, 16u);
  EXPECT_EQ(cfg.dt, 0.01);
  EXPECT_EQ(cfg.final_time, 0.5);
  EXPECT_EQ(cfg.num_steps(), 50u);
  EXPECT_EQ(cfg.u0, InitialKind::Constant);
  EXPECT_EQ(cfg.u0_constant, 1.0);
  EXPECT_TRUE(cfg.write_csv);
  EXPECT_TRUE(cfg.write_vtk);
}

TEST(ParseConfig, ValuesCommentsAndCase) {
  const RunConfig cfg = parse_config(
      "# header\n"
      "mesh = equilateral   # trailing comment\n"
      "NX = 6\n"
      "edge = 0.25\n"
      "dt = 0.02\n"
      "T = 0.2\n"
      "u0 = bump\n"
      "nonlinear_solver = Picard\n"
      "output_format = csv\n"
      "check_energy = false\n"
      "\n");
  EXPECT_EQ(cfg.mesh_kind, MeshKind::Equilateral);
  EXPECT_EQ(cfg.nx, 6u);
  EXPECT_EQ(cfg.ny, 6u);
  EXPECT_EQ(cfg.edge, 0.25);
  EXPECT_EQ(cfg.num_steps(), 10u);
  EXPECT_EQ(cfg.u0, InitialKind::Bump);
  EXPECT_EQ(cfg.nonlinear_solver, NonlinearSolver::Picard);
  EXPECT_TRUE(cfg.write_csv);
  EXPECT_FALSE(cfg.write_vtk);
  EXPECT_FALSE(cfg.check_energy);
}

TEST(ParseConfig, SyntaxErrorsNameTheLine) {
  EXPECT_EQ(error_message<ParseError>("nx = 4\nfoo = 1\n"), "line 2: unknown key 'foo'");
  EXPECT_EQ(error_message<ParseError>("dt = 0.1\ndt = 0.2\n"), "line 2: duplicate key 'dt'");
  EXPECT_EQ(error_message<ParseError>("nx 4\n"), "line 1: expected 'key = value'");
  EXPECT_NE(error_message<ParseError>("nx = four\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_message<ParseError>("u0 = wave\n").find("u0"), std::string::npos);
  EXPECT_NE(error_message<ParseError>("nx = -3\n").find("nx"), std::string::npos);
}

TEST(ParseConfig, ConstraintViolations) {
  EXPECT_EQ(error_message<ConfigError>("u0_constant = -1\n"),
            "u0_constant = -1 is negative; the model requires a nonnegative initial temperature");
  error_message<ConfigError>("dt = 0.03\nT = 0.1\n");
  error_message<ConfigError>("dt = 0\n");
  error_message<ConfigError>("u0 = csv\n");
  error_message<ConfigError>("nx = 0\n");
  error_message<ConfigError>("newton_tol = 0\n");
}

TEST(LoadConfig, RelativePathsResolveAgainstConfigDir) {
  const fs::path dir = scratch_dir("load");
  write(dir / "pair.mesh", test::right_triangle_pair_text());
  write(dir / "run.cfg", "mesh = pair.mesh\n");
  const RunConfig cfg = load_config(dir / "run.cfg");
  EXPECT_EQ(cfg.mesh_kind, MeshKind::File);
  EXPECT_EQ(cfg.build_mesh().num_cells(), 2u);
  EXPECT_THROW(load_config(dir / "missing.cfg"), Error);
}

TEST(CheckMesh, EquilateralPasses) {
  RunConfig cfg = parse_config("mesh = equilateral\nnx = 4\n");
  cfg.output_dir = scratch_dir("check_eq");
  std::ostringstream log;
  EXPECT_EQ(cmd_check_mesh(cfg, log), 0);
  EXPECT_NE(log.str().find("theta_M: 0.2886751346"), std::string::npos) << log.str();
  EXPECT_NE(slurp(cfg.output_dir / "mesh_report.txt").find("admissible: PASS"), std::string::npos);
}

TEST(CheckMesh, RightTrianglePairFails) {
  const fs::path dir = scratch_dir("check_pair");
  write(dir / "pair.mesh", test::right_triangle_pair_text());
  RunConfig cfg = parse_config("mesh = pair.mesh\n");
  cfg.base_dir = dir;
  cfg.output_dir = dir / "out";
  std::ostringstream log;
  EXPECT_EQ(cmd_check_mesh(cfg, log), 1);
  EXPECT_NE(log.str().find("admissible: FAIL"), std::string::npos);
  EXPECT_NE(log.str().find("degenerate_faces: 1"), std::string::npos);
}

TEST(Verify, InadmissibleMeshStopsEarly) {
  const fs::path dir = scratch_dir("verify_pair");
  write(dir / "pair.mesh", test::right_triangle_pair_text());
  RunConfig cfg = parse_config("mesh = pair.mesh\n");
  cfg.base_dir = dir;
  cfg.output_dir = dir / "out";
  std::ostringstream log;
  EXPECT_NE(cmd_verify(cfg, log), 0);
  EXPECT_NE(log.str().find("check admissibility: FAIL"), std::string::npos) << log.str();
  EXPECT_EQ(log.str().find("check max_principle"), std::string::npos);
}

TEST(Verify, SmallBumpRunPassesEveryCheck) {
  RunConfig cfg = parse_config("nx = 8\ndt = 0.01\nT = 0.1\nu0 = bump\nverify_fields = 20\n");
  cfg.output_dir = scratch_dir("verify_bump");
  std::ostringstream log;
  EXPECT_EQ(cmd_verify(cfg, log), 0) << log.str();
  const std::string report = slurp(cfg.output_dir / "verify_report.txt");
  EXPECT_EQ(report.find("FAIL"), std::string::npos) << report;
  EXPECT_NE(report.find("verify: PASS"), std::string::npos);
}

TEST(Run, WritesFieldsAndReport) {
  RunConfig cfg = parse_config("nx = 4\ndt = 0.05\nT = 0.2\nvtk_stride = 2\n");
  cfg.output_dir = scratch_dir("run");
  std::ostringstream log;
  EXPECT_EQ(cmd_run(cfg, log), 0) << log.str();
  for (const char* f : {"fields.csv", "fields_000000.vtk", "fields_000002.vtk", "fields_000004.vtk", "run_report.txt"}) {
    EXPECT_TRUE(fs::exists(cfg.output_dir / f)) << f;
  }
  const std::string report = slurp(cfg.output_dir / "run_report.txt");
  EXPECT_NE(report.find("max_principle: PASS"), std::string::npos) << report;
  EXPECT_NE(report.find("mean_identity: PASS"), std::string::npos);
  EXPECT_NE(report.find("energy: PASS"), std::string::npos);
}

TEST(Run, CsvInitialData) {
  const fs::path dir = scratch_dir("run_csv");
  std::string rows;
  for (int k = 0; k < 2 * 2 * 2 + 2; ++k) rows += std::to_string(k) + "," + std::to_string(0.1 * k) + "\n";
  write(dir / "u0.csv", rows);
  RunConfig cfg = parse_config("nx = 2\ndt = 0.1\nT = 0.2\nu0 = csv\nu0_csv = u0.csv\noutput_format = csv\n");
  cfg.base_dir = dir;
  cfg.output_dir = dir / "out";
  std::ostringstream log;
  EXPECT_EQ(cmd_run(cfg, log), 0) << log.str();
  EXPECT_TRUE(fs::exists(cfg.output_dir / "fields.csv"));
  EXPECT_FALSE(fs::exists(cfg.output_dir / "fields_000000.vtk"));
}

TEST(Convergence, WritesTable) {
  RunConfig cfg = parse_config("nx = 2\ndt = 0.05\nT = 0.1\nlevels = 3\n");
  cfg.output_dir = scratch_dir("conv");
  std::ostringstream log;
  EXPECT_EQ(cmd_convergence(cfg, log), 0) << log.str();
  const std::string csv = slurp(cfg.output_dir / "convergence.csv");
  EXPECT_EQ(csv.rfind("level,cells,", 0), 0u);
  EXPECT_NE(log.str().find("cauchy_strictly_decreasing"), std::string::npos);
}
