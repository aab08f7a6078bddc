#pragma once

#include <stdexcept>
#include <string>

namespace p1fv {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input (mesh files, CSV fields, config files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Mesh connectivity is not a conforming, counterclockwise triangulation.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Geometry violates the two-point-flux admissibility requirements.
class AdmissibilityError : public Error {
 public:
  using Error::Error;
};

/// Fields or operators belong to different meshes / have wrong sizes.
class MeshMismatchError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  enum class Kind { NotConverged, Breakdown };
  SolverError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Newton / Picard iteration did not reach the requested residual.
class NonlinearSolverError : public Error {
 public:
  using Error::Error;
};

/// A computed state left the bounds guaranteed by the discrete maximum
/// principle by more than roundoff. Always indicates a bug.
class MaxPrincipleViolation : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value or unknown key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace p1fv
