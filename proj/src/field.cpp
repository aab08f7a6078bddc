#include "p1fv/field.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "p1fv/error.hpp"

namespace p1fv {

CellField::CellField(std::shared_ptr<const Mesh> mesh, std::vector<double> values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_) throw MeshMismatchError("CellField: null mesh");
  if (values_.size() != mesh_->num_cells()) {
    std::ostringstream msg;
    msg << "CellField: " << values_.size() << " values for a mesh with " << mesh_->num_cells() << " cells";
    throw MeshMismatchError(msg.str());
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      std::ostringstream msg;
      msg << "CellField: non-finite value in cell " << k;
      throw Error(msg.str());
    }
  }
}

CellField CellField::constant(std::shared_ptr<const Mesh> mesh, double value) {
  const std::size_t n = mesh ? mesh->num_cells() : 0;
  return CellField(std::move(mesh), std::vector<double>(n, value));
}

double CellField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double CellField::min() const { return *std::min_element(values_.begin(), values_.end()); }

void require_same_mesh(const CellField& a, const CellField& b) {
  if (a.mesh_ptr() != b.mesh_ptr()) throw MeshMismatchError("fields are defined on different meshes");
}

std::size_t step_count(double dt, double final_time) {
  if (!(dt > 0.0) || !(final_time > 0.0)) throw ConfigError("dt and T must be positive");
  const double ratio = final_time / dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(n * dt - final_time) > 1e-12 * final_time) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "T = " << final_time << " is not an integer multiple of dt = " << dt;
    throw ConfigError(msg.str());
  }
  return static_cast<std::size_t>(n);
}

SpaceTimeField::SpaceTimeField(std::vector<CellField> steps, double dt, double final_time)
    : steps_(std::move(steps)), dt_(dt), final_time_(final_time) {
  if (steps_.size() < 2) throw Error("SpaceTimeField: need at least two time levels");
  if (step_count(dt, final_time) != steps_.size() - 1) {
    throw Error("SpaceTimeField: N dt does not match T");
  }
  for (const auto& s : steps_) require_same_mesh(s, steps_.front());
}

void write_cell_field_csv(std::ostream& out, const CellField& field) {
  std::ostringstream buf;
  buf << std::setprecision(17);
  for (std::size_t k = 0; k < field.size(); ++k) buf << k << ',' << field[k] << '\n';
  out << buf.str();
}

CellField read_cell_field_csv(std::istream& in, std::shared_ptr<const Mesh> mesh) {
  const std::size_t n = mesh->num_cells();
  std::vector<double> values(n, 0.0);
  std::vector<bool> seen(n, false);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto comma = line.find(',');
    std::istringstream idx_in(line.substr(0, comma));
    std::istringstream val_in(comma == std::string::npos ? "" : line.substr(comma + 1));
    long long idx = -1;
    double value = 0.0;
    if (comma == std::string::npos || !(idx_in >> idx) || !(val_in >> value)) {
      // Tolerate one header line.
      if (lineno == 1) continue;
      throw ParseError("cell field csv: line " + std::to_string(lineno) + " is not `cell_index,value`");
    }
    if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
      throw ParseError("cell field csv: line " + std::to_string(lineno) + ": cell index out of range");
    }
    if (seen[static_cast<std::size_t>(idx)]) {
      throw ParseError("cell field csv: duplicate cell index " + std::to_string(idx));
    }
    seen[static_cast<std::size_t>(idx)] = true;
    values[static_cast<std::size_t>(idx)] = value;
  }
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) {
    throw ParseError("cell field csv: not every cell has a value");
  }
  return CellField(std::move(mesh), std::move(values));
}

}  // namespace p1fv
