#pragma once

// Trajectory export: one CSV table and legacy ASCII VTK snapshots.
// Numbers are written with %.17g, so equal inputs give equal bytes.

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "p1fv/field.hpp"
#include "p1fv/scheme.hpp"

namespace p1fv {

struct OutputOptions {
  bool csv = true;
  bool vtk = true;
  /// VTK snapshots every `vtk_stride` steps; 0 writes only the first and
  /// last. The last step is always written.
  std::size_t vtk_stride = 0;
  std::string prefix = "fields";
};

/// `step,time,cell,u,phi` rows for n = 0..N.
void write_fields_csv(std::ostream& out, const SpaceTimeField& u, const SpaceTimeField& phi);

/// Unstructured grid with cell scalars `u` and `phi` at step n.
void write_fields_vtk(std::ostream& out, const SpaceTimeField& u, const SpaceTimeField& phi, std::size_t n);

/// Creates `dir` if needed and returns the files written. Throws Error on
/// I/O failure.
std::vector<std::filesystem::path> write_fields(const Trajectory& traj, const OutputOptions& options,
                                                const std::filesystem::path& dir);

/// Steps that receive a VTK snapshot for N intervals.
std::vector<std::size_t> vtk_steps(std::size_t num_intervals, std::size_t stride);

}  // namespace p1fv
