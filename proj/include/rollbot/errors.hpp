#pragma once

#include <stdexcept>
#include <string>

namespace rollbot {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Geometric input cannot be processed (rank-deficient matrix, collinear points).
struct DegenerateInput : Error {
  using Error::Error;
};

// Iterative solver exhausted its iteration budget.
struct NoConvergence : Error {
  using Error::Error;
};

// Quasi-static solver landed on a different equilibrium branch than requested.
struct WrongBranch : Error {
  using Error::Error;
};

struct InvalidState : Error {
  using Error::Error;
};

struct SingularInertia : Error {
  using Error::Error;
};

struct OutOfRange : Error {
  using Error::Error;
};

struct InfeasibleSpeed : Error {
  using Error::Error;
};

struct StalePose : Error {
  using Error::Error;
};

// Contact validity flag went false while strict checking is enabled.
struct ContactViolation : Error {
  double when;
  ContactViolation(const std::string& msg, double t) : Error(msg), when(t) {}
};

// Config file failed schema validation.
struct SchemaError : Error {
  using Error::Error;
};

}  // namespace rollbot
