#pragma once

// Fixed-step RK4 propagation of the rolling-shell dynamics, driven by a
// piecewise-linear motor speed profile. The pendulum angle is integrated
// exactly from the profile, so only orientation, angular velocity and center
// position go through the Runge-Kutta stages.

#include <optional>
#include <vector>

#include "rollbot/dynamics.hpp"

namespace rollbot {

// One motor command: from start_time, ramp the drive speed toward
// target_speed at |accel_limit|, then hold until the next segment.
struct DriveSegment {
  double start_time = 0.0;   // s
  double target_speed = 0.0; // rad/s
  double accel_limit = 0.0;  // rad/s^2, must be > 0 unless already at target
};

// Compiled drive-speed schedule: piecewise-linear speed, exactly integrable.
class DriveProfile {
 public:
  DriveProfile(double start_time, double initial_speed,
               std::vector<DriveSegment> segments);
  static DriveProfile constant(double speed);

  double speed(double t) const;
  double accel(double t) const;
  // integral of speed over [t0, t1], evaluated in closed form
  double angle_increment(double t0, double t1) const;

 private:
  struct Knot {
    double t;
    double speed;
    double accel;  // slope toward the next knot (0 after the last)
  };
  std::vector<Knot> knots_;

  const Knot& knot_at(double t) const;
};

struct SimOptions {
  bool strict_contact = false;        // throw on contact flag violations
  Vec3 external_force = Vec3::Zero(); // constant disturbance at the center, N
};

struct TrajectorySample {
  double t = 0.0;
  ShellState state;
  ContactReport contact;
};

struct Trajectory {
  std::vector<TrajectorySample> samples;
  double stride = 0.0;  // spacing between samples, s
};

// Contact report for the state at time t under the given drive profile.
ContactReport evaluate_contact(const RobotParams& p, const ShellState& st,
                               const DriveProfile& drive, double t,
                               const SimOptions& opts = {});

// One RK4 step of length dt starting at time t.
ShellState step(const RobotParams& p, const ShellState& st,
                const DriveProfile& drive, double t, double dt,
                const SimOptions& opts = {});

// Integrates over [0, duration] with step dt, recording every stride seconds
// (stride must be a multiple of dt; 0 picks stride = dt).
Trajectory simulate(const RobotParams& p, const ShellState& initial,
                    const DriveProfile& drive, double duration, double dt,
                    double stride = 0.0, const SimOptions& opts = {});

// Least-squares circle through ground-plane points (z ignored).
struct CircleFit {
  Vec3 center = Vec3::Zero();  // z = 0
  double radius = 0.0;
  double residual = 0.0;  // rms distance-to-circle error
};
CircleFit fit_circle(std::span<const Vec3> points);

}  // namespace rollbot
