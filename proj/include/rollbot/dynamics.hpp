#pragma once

// Equations of motion of a spherical shell rolling without slipping, driven by
// internal point masses. The shell is spherically symmetric; each internal
// mass follows a prescribed body-frame trajectory. Ground contact is reduced
// to a torque balance about the contact point, so the state is orientation +
// angular velocity; the center position follows from the rolling constraint.

#include <span>
#include <vector>

#include "rollbot/spatial.hpp"

namespace rollbot {

struct RobotParams {
  double shell_radius = 0.12;       // m
  double shell_mass = 0.840;        // kg
  double shell_inertia = 0.0053;    // kg m^2, isotropic
  double cone_angle = M_PI / 4.0;   // rad, pendulum arm half-angle from motor axis
  double pendulum_offset = 0.093;   // m, mass distance from shell center
  double pendulum_mass = 0.306;     // kg
  double bead_mass = 0.040;         // kg, folded into the carried shell mass
  double damping = 0.0048384;       // kg m^2/s, (0.4 s^-1) * shell_mass * shell_radius^2
  double friction = 0.8;            // ground friction coefficient, validity flag only
  double gravity = 9.81;            // m/s^2

  // Carried mass rolling with the shell (shell + beads).
  double carried_mass() const { return shell_mass + bead_mass; }
  double total_mass() const { return carried_mass() + pendulum_mass; }

  void validate() const;  // throws InvalidState on violated invariants
};

struct ShellState {
  Mat3 orientation = Mat3::Identity();    // body -> ground
  Vec3 angular_velocity = Vec3::Zero();   // ground frame, rad/s
  Vec3 center = Vec3::Zero();             // m; center.z() stays at shell_radius
  double pendulum_angle = 0.0;            // rad, about the body z axis
  double drive_speed = 0.0;               // rad/s, pendulum angle rate
};

// Body-frame kinematics of one internal point mass.
struct MassKinematics {
  Vec3 position = Vec3::Zero();      // m
  Vec3 velocity = Vec3::Zero();      // m/s
  Vec3 acceleration = Vec3::Zero();  // m/s^2
  double mass = 0.0;                 // kg
};

struct ContactReport {
  Vec3 force = Vec3::Zero();  // N, normal + friction the ground applies
  bool normal_positive = false;
  bool within_friction_cone = false;
};

// Pendulum mass on a cone of half-angle cone_angle around the body z axis:
// position r0 (sin phi cos theta, sin phi sin theta, -cos phi), derivatives
// chain-ruled with the given angle rates.
MassKinematics pendulum_kinematics(const RobotParams& p, double theta,
                                   double theta_dot, double theta_ddot);

// Inertial acceleration of a frame-carried mass, exclusive of the angular
// acceleration term: w x (w x r) + 2 w x r' + r'' with r = orient * body pos.
Vec3 inertial_term(const Vec3& angular_velocity, const Mat3& orientation,
                   const MassKinematics& mk);

// Moment-of-inertia operator of the whole robot about the contact point.
Mat3 inertia_about_contact(const RobotParams& p, const Mat3& orientation,
                           std::span<const MassKinematics> masses);

// Torque about the contact point from mass inertia, gravity, and the external
// wrench; the right-hand side of the angular equation of motion.
Vec3 contact_torque(const RobotParams& p, const Vec3& angular_velocity,
                    const Mat3& orientation, std::span<const MassKinematics> masses,
                    const Vec3& external_force, const Vec3& external_torque);

// Solves the angular equation of motion for the shell's angular acceleration.
// Damping is not applied here; callers pass it through external_torque.
Vec3 angular_acceleration(const RobotParams& p, const ShellState& st,
                          std::span<const MassKinematics> masses,
                          const Vec3& external_force, const Vec3& external_torque);

// Ground reaction from the already-computed accelerations, with the no-jump
// and no-slip validity flags.
ContactReport contact_force(const RobotParams& p, const ShellState& st,
                            const Vec3& center_accel, const Vec3& mass_accel_ground,
                            const Vec3& external_force);

// Diagnostics used by the energy audit: total mechanical energy of shell +
// pendulum under the rolling constraint, and the power the motor injects to
// hold the pendulum on its prescribed trajectory.
double mechanical_energy(const RobotParams& p, const ShellState& st);
double motor_power(const RobotParams& p, const ShellState& st, double theta_ddot);

}  // namespace rollbot
