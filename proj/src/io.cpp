#include "p1fv/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>

#include "p1fv/error.hpp"

namespace p1fv {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void require_matching(const SpaceTimeField& u, const SpaceTimeField& phi) {
  if (u.num_intervals() != phi.num_intervals()) throw MeshMismatchError("u and phi have different step counts");
  require_same_mesh(u[0], phi[0]);
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace

void write_fields_csv(std::ostream& out, const SpaceTimeField& u, const SpaceTimeField& phi) {
  require_matching(u, phi);
  out << "step,time,cell,u,phi\n";
  for (std::size_t n = 0; n <= u.num_intervals(); ++n) {
    const std::string t = num(static_cast<double>(n) * u.dt());
    for (std::size_t k = 0; k < u[n].size(); ++k) {
      out << n << ',' << t << ',' << k << ',' << num(u[n][k]) << ',' << num(phi[n][k]) << '\n';
    }
  }
}

void write_fields_vtk(std::ostream& out, const SpaceTimeField& u, const SpaceTimeField& phi, std::size_t n) {
  require_matching(u, phi);
  if (n > u.num_intervals()) throw ConfigError("VTK step index out of range");
  const Mesh& mesh = u.mesh();
  const std::size_t nc = mesh.num_cells();
  out << "# vtk DataFile Version 3.0\n";
  out << "p1fv step " << n << " time " << num(static_cast<double>(n) * u.dt()) << '\n';
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.vertices().size() << " double\n";
  for (const Point2& p : mesh.vertices()) out << num(p.x) << ' ' << num(p.y) << " 0\n";
  out << "CELLS " << nc << ' ' << 4 * nc << '\n';
  for (const auto& c : mesh.cells()) out << "3 " << c[0] << ' ' << c[1] << ' ' << c[2] << '\n';
  out << "CELL_TYPES " << nc << '\n';
  for (std::size_t k = 0; k < nc; ++k) out << "5\n";
  out << "CELL_DATA " << nc << '\n';
  for (const auto& [name, field] : {std::pair<const char*, const CellField*>{"u", &u[n]}, {"phi", &phi[n]}}) {
    out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (std::size_t k = 0; k < nc; ++k) out << num((*field)[k]) << '\n';
  }
}

std::vector<std::size_t> vtk_steps(std::size_t num_intervals, std::size_t stride) {
  std::vector<std::size_t> steps;
  if (stride == 0) {
    steps.push_back(0);
  } else {
    for (std::size_t n = 0; n < num_intervals; n += stride) steps.push_back(n);
  }
  if (steps.back() != num_intervals) steps.push_back(num_intervals);
  return steps;
}

std::vector<std::filesystem::path> write_fields(const Trajectory& traj, const OutputOptions& options,
                                                const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;
  if (options.csv) {
    const auto path = dir / (options.prefix + ".csv");
    auto out = open_output(path);
    write_fields_csv(out, traj.u, traj.phi);
    finish(out, path);
    written.push_back(path);
  }
  if (options.vtk) {
    for (std::size_t n : vtk_steps(traj.u.num_intervals(), options.vtk_stride)) {
      char name[32];
      std::snprintf(name, sizeof name, "_%06zu.vtk", n);
      const auto path = dir / (options.prefix + name);
      auto out = open_output(path);
      write_fields_vtk(out, traj.u, traj.phi, n);
      finish(out, path);
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace p1fv
