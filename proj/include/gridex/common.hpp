#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace gridex {

// Error taxonomy shared by every module. Each kind maps to one of the error
// classes the operations are allowed to raise.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class ConfigError : public Error {
 public:
  using Error::Error;
};
class PreconditionError : public Error {
 public:
  using Error::Error;
};
class StateError : public Error {
 public:
  using Error::Error;
};
class IntegrityError : public Error {
 public:
  using Error::Error;
};
class InputError : public Error {
 public:
  using Error::Error;
};
class ProtocolError : public Error {
 public:
  using Error::Error;
};
class UndefinedScoreError : public Error {
 public:
  using Error::Error;
};
class LivelockError : public Error {
 public:
  using Error::Error;
};

/// World-frame position in meters.
struct Pose2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

inline double distance(Pose2 a, Pose2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Integer cell coordinates on an occupancy grid.
struct CellIndex {
  int x = 0;
  int y = 0;

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

}  // namespace gridex
