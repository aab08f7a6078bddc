#pragma once

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "p1fv/mesh.hpp"

namespace p1fv {

/// Piecewise-constant function: one finite value per cell of a mesh.
class CellField {
 public:
  CellField(std::shared_ptr<const Mesh> mesh, std::vector<double> values);

  static CellField constant(std::shared_ptr<const Mesh> mesh, double value);
  static CellField zeros(std::shared_ptr<const Mesh> mesh) { return constant(std::move(mesh), 0.0); }

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }

  double max() const;
  double min() const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  std::vector<double> values_;
};

/// Throws MeshMismatchError unless both fields live on the same mesh object.
void require_same_mesh(const CellField& a, const CellField& b);

/// Sequence u^0..u^N on a uniform time grid with N dt = T.
class SpaceTimeField {
 public:
  SpaceTimeField(std::vector<CellField> steps, double dt, double final_time);

  const std::vector<CellField>& steps() const noexcept { return steps_; }
  const CellField& operator[](std::size_t n) const { return steps_[n]; }
  std::size_t num_intervals() const noexcept { return steps_.size() - 1; }
  double dt() const noexcept { return dt_; }
  double final_time() const noexcept { return final_time_; }
  const Mesh& mesh() const { return steps_.front().mesh(); }

 private:
  std::vector<CellField> steps_;
  double dt_;
  double final_time_;
};

/// Number of uniform steps of size dt covering [0, T]; throws ConfigError
/// unless T/dt is an integer within 1e-12 relative.
std::size_t step_count(double dt, double final_time);

/// `cell_index,value` lines.
void write_cell_field_csv(std::ostream& out, const CellField& field);
CellField read_cell_field_csv(std::istream& in, std::shared_ptr<const Mesh> mesh);

}  // namespace p1fv
