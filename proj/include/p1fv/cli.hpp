#pragma once

// Configuration file and the subcommands of the command-line tool.
//
// Config files hold `key = value` lines; `#` starts a comment. Keys:
//   mesh               rectangle | equilateral | <path to mesh file>   (rectangle)
//   nx, ny             generator cells per direction                  (16, ny = nx)
//   lx, ly             rectangle extents                              (1, 1)
//   edge               equilateral edge length                        (1)
//   dt, T              time step and final time                       (0.01, 0.5)
//   u0                 constant | bump | csv                          (constant)
//   u0_constant        value for u0 = constant                        (1)
//   u0_csv             `cell,value` file for u0 = csv
//   nonlinear_solver   newton | picard                                (newton)
//   newton_tol, newton_max_iter, linear_rel_tol, linear_max_iter,
//   correction_rel_tol                                                (scheme defaults)
//   output_dir         directory for all files                        (out)
//   output_format      csv | vtk | both                               (both)
//   vtk_stride         snapshot stride, 0 = first and last            (0)
//   check_operators, check_max_principle, check_energy,
//   check_translates, check_chi                                       (true)
//   verify_fields      random fields per operator check               (100)
//   seed               seed of the random checks                      (1)
//   manufactured       add the unit-square manufactured sources       (false)
//   levels             convergence levels                             (4)
//   parallel_levels    run convergence levels concurrently            (false)

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "p1fv/io.hpp"
#include "p1fv/scheme.hpp"

namespace p1fv {

enum class MeshKind { Rectangle, Equilateral, File };
enum class InitialKind { Constant, Bump, Csv };

struct RunConfig {
  MeshKind mesh_kind = MeshKind::Rectangle;
  std::string mesh_path;
  std::size_t nx = 16;
  std::size_t ny = 16;
  double lx = 1.0;
  double ly = 1.0;
  double edge = 1.0;

  double dt = 0.01;
  double final_time = 0.5;
  InitialKind u0 = InitialKind::Constant;
  double u0_constant = 1.0;
  std::string u0_csv;
  NonlinearSolver nonlinear_solver = NonlinearSolver::Newton;
  double newton_tol = 1e-12;
  std::size_t newton_max_iter = 50;
  double linear_rel_tol = SolverConfig{}.rel_tol;
  std::size_t linear_max_iter = 0;
  double correction_rel_tol = 1e-10;

  std::filesystem::path output_dir = "out";
  bool write_csv = true;
  bool write_vtk = true;
  std::size_t vtk_stride = 0;

  bool check_operators = true;
  bool check_max_principle = true;
  bool check_energy = true;
  bool check_translates = true;
  bool check_chi = true;
  std::size_t verify_fields = 100;
  std::uint64_t seed = 1;

  bool manufactured = false;
  std::size_t levels = 4;
  bool parallel_levels = false;

  /// Relative paths (mesh, u0_csv) are resolved against this directory.
  std::filesystem::path base_dir;

  std::size_t num_steps() const { return step_count(dt, final_time); }
  Mesh build_mesh() const;
  /// Scheme settings for `disc`; reads u0_csv when selected.
  SchemeConfig scheme(const Discretization& disc) const;
  OutputOptions output() const;
};

/// Throws ParseError on syntax errors, unknown keys and bad values, and
/// ConfigError on violated constraints.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Each command logs to `log` and returns the process exit status. Library
/// errors propagate to the caller.
int cmd_run(const RunConfig& cfg, std::ostream& log);
int cmd_check_mesh(const RunConfig& cfg, std::ostream& log);
int cmd_verify(const RunConfig& cfg, std::ostream& log);
int cmd_convergence(const RunConfig& cfg, std::ostream& log);

}  // namespace p1fv
