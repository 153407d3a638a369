#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace uwbcoop {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violated a documented invariant (non-finite value, bad size, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Too few measurements to fix the unknowns.
class UnderdeterminedError : public Error {
 public:
  using Error::Error;
};

/// Responder geometry cannot pin down the solution (e.g. collinear anchors).
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Yaw cannot be recovered from the given initiator offsets.
class YawUnobservableError : public Error {
 public:
  using Error::Error;
};

/// Too many consecutive non-converged solves during a flight.
class EstimatorDivergenceError : public Error {
 public:
  EstimatorDivergenceError(const std::string& what, double t) : Error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// The tracker found no points inside the gate around its prediction.
class TrackLostError : public Error {
 public:
  TrackLostError(const std::string& what, const Eigen::Vector3d& predicted)
      : Error(what), predicted_(predicted) {}
  const Eigen::Vector3d& predicted() const noexcept { return predicted_; }

 private:
  Eigen::Vector3d predicted_;
};

/// Malformed input file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace uwbcoop
