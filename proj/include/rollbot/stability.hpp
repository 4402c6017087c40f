#pragma once

// Linear stability of the circular-rolling equilibria. In a frame co-rotating
// with the orbit the equilibrium is a fixed point of an autonomous 6-state
// system (orientation chart + angular velocity); its Jacobian, put into
// companion form, gives the perturbation spectrum. One zero eigenvalue is
// forced by the rotational symmetry of the family; the slowest remaining mode
// sets the recovery time after a disturbance.

#include <complex>

#include "rollbot/quasistatic.hpp"

namespace rollbot {

using Vec6c = Eigen::Matrix<std::complex<double>, 6, 1>;

struct StabilityReport {
  double drive_speed = 0.0;
  Vec6c eigenvalues;            // sorted by descending real part
  int trivial_index = -1;       // symmetry mode within eigenvalues
  double trivial_alignment = 0.0;  // |eigenvector . symmetry generator|
  double recovery_time = 0.0;   // s; negative real parts decay, -1/Re
  bool stable = false;
};

// Right-hand side of the reduced co-rotating system at state
// (orientation chart alpha, angular velocity w); exposed for testing.
Vec6 reduced_dynamics(const RobotParams& p, const QuasiStaticState& qs,
                      const Vec6& x);

// Jacobian of the reduced system at the equilibrium via central differences,
// returned in companion form (top blocks exactly [0 I]).
Mat6 linearize(const RobotParams& p, const QuasiStaticState& qs,
               double fd_step = 1e-6);

// Eigenvalues of the 6x6 system matrix, sorted by descending real part.
Vec6c spectrum(const Mat6& system);

// Recovery analysis over a spectrum: identify the symmetry mode by smallest
// |Re|, then read decay off the slowest remaining mode.
struct RecoveryInfo {
  int trivial_index = -1;
  double slowest_real = 0.0;  // largest non-trivial real part
  double recovery_time = 0.0;
  bool stable = false;
};
RecoveryInfo recovery(const Vec6c& eigenvalues);

StabilityReport analyze_stability(const RobotParams& p,
                                  const QuasiStaticState& qs,
                                  double fd_step = 1e-6);

struct StabilitySweep {
  std::vector<StabilityReport> reports;
  std::vector<std::pair<double, std::string>> failures;  // drive speed, reason
};
StabilitySweep stability_sweep(const RobotParams& p,
                               const EquilibriumTable& table);

}  // namespace rollbot
