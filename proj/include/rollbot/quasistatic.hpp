#pragma once

// Steady circular-rolling equilibria: at constant drive speed the shell
// settles onto a circle, revolving about a fixed vertical axis while the
// pendulum holds a constant phase relative to the tilt plane. The family is
// parameterized by drive speed; each member solves a three-unknown torque
// balance (revolve rate, pendulum phase, axis tilt).

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rollbot/dynamics.hpp"

namespace rollbot {

enum class Branch {
  Normal,         // pendulum phase near zero
  FastRevolving,  // pendulum phase near pi
};

struct QuasiStaticState {
  double drive_speed = 0.0;     // rad/s, the free parameter
  double revolve_rate = 0.0;    // rad/s about the vertical through the orbit center
  double pendulum_phase = 0.0;  // rad, pendulum angle at the reference time
  double axis_tilt = 0.0;       // rad, spin-axis tilt from vertical
  double orbit_radius = 0.0;    // m, circle traced by the shell center
  double residual_norm = 0.0;   // dimensionless torque-balance defect
  Branch branch = Branch::Normal;
};

// Torque-balance defect of the circular-rolling ansatz, normalized by
// total weight times shell radius. unknowns = (revolve rate, pendulum phase,
// axis tilt). Throws InvalidState when the revolve rate vanishes (the orbit
// radius is undefined there).
Vec3 equilibrium_residual(const RobotParams& p, double drive_speed,
                          const Vec3& unknowns);

// Damped Newton solve for one equilibrium. Without a guess, continues the
// family up from the analytic static limit at zero drive speed.
QuasiStaticState solve_equilibrium(const RobotParams& p, double drive_speed,
                                   std::optional<Vec3> guess = std::nullopt,
                                   Branch branch = Branch::Normal);

// Equilibrium family over an ascending drive-speed grid, with cubic-Hermite
// interpolation between solved rows.
class EquilibriumTable {
 public:
  std::vector<QuasiStaticState> rows;
  std::vector<std::pair<double, std::string>> failures;  // drive speed, reason

  double min_drive_speed() const;
  double max_drive_speed() const;

  double orbit_radius_at(double drive_speed) const;
  double revolve_rate_at(double drive_speed) const;
  double axis_tilt_at(double drive_speed) const;
  double pendulum_phase_at(double drive_speed) const;

  // sensitivity of orbit radius to drive speed, for converting a desired
  // radius rate into a motor command rate
  double radius_slope(double drive_speed) const;

  // monotone inversions over the tabulated range
  double drive_speed_for_radius(double orbit_radius) const;
  double drive_speed_for_travel(double ground_speed) const;

  double travel_speed_at(double drive_speed) const;  // revolve rate * radius
};

EquilibriumTable sweep_equilibria(const RobotParams& p,
                                  std::span<const double> drive_speeds);

// Full shell state sitting on the equilibrium at its reference time, with the
// orbit centered on the origin and the shell starting on the +x axis.
ShellState equilibrium_shell_state(const RobotParams& p,
                                   const QuasiStaticState& qs);

}  // namespace rollbot
