#pragma once

#include <stdexcept>
#include <string>

namespace fwmips {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Mismatched vector/matrix dimensions.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Input norm exceeds the radius bound of a unit-sphere transform.
class RadiusError : public Error {
public:
  using Error::Error;
};

/// Input expected on the unit sphere (or finite) but is not.
class NormError : public Error {
public:
  using Error::Error;
};

/// Parameter outside its documented range.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Supplied hull weights do not certify hull membership.
class NotInHullError : public Error {
public:
  using Error::Error;
};

/// Unknown or dead point index.
class IndexError : public Error {
public:
  using Error::Error;
};

/// Query against an index with no live points.
class EmptyIndexError : public Error {
public:
  using Error::Error;
};

/// Solver exceeded its consecutive r-halving budget without progress.
class StallError : public Error {
public:
  using Error::Error;
};

/// Calibration sweep could not reach its target.
class CalibrationError : public Error {
public:
  using Error::Error;
};

/// File IO failure; message carries the path.
class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace fwmips
