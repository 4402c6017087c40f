#include "rollbot/dynamics.hpp"

#include <cmath>

#include "rollbot/errors.hpp"

namespace rollbot {

void RobotParams::validate() const {
  if (!(shell_radius > 0.0) || !(shell_mass > 0.0) || !(shell_inertia > 0.0))
    throw InvalidState("shell radius, mass and inertia must be positive");
  if (!(pendulum_mass > 0.0) || bead_mass < 0.0)
    throw InvalidState("pendulum mass must be positive, bead mass non-negative");
  if (!(pendulum_offset > 0.0) || pendulum_offset >= shell_radius)
    throw InvalidState("pendulum offset must lie strictly inside the shell");
  if (!(cone_angle > 0.0) || cone_angle >= M_PI / 2.0)
    throw InvalidState("cone angle must lie in (0, pi/2)");
  if (damping < 0.0 || friction < 0.0 || !(gravity > 0.0))
    throw InvalidState("damping and friction must be non-negative, gravity positive");
}

MassKinematics pendulum_kinematics(const RobotParams& p, double theta,
                                   double theta_dot, double theta_ddot) {
  const double sp = std::sin(p.cone_angle);
  const double cp = std::cos(p.cone_angle);
  const double st = std::sin(theta);
  const double ct = std::cos(theta);
  const Vec3 radial(ct, st, 0.0);      // outward in the cone circle
  const Vec3 tangent(-st, ct, 0.0);    // direction of increasing theta

  MassKinematics mk;
  mk.mass = p.pendulum_mass;
  mk.position = p.pendulum_offset * Vec3(sp * ct, sp * st, -cp);
  mk.velocity = p.pendulum_offset * sp * theta_dot * tangent;
  mk.acceleration =
      p.pendulum_offset * sp *
      (theta_ddot * tangent - theta_dot * theta_dot * radial);
  return mk;
}

Vec3 inertial_term(const Vec3& angular_velocity, const Mat3& orientation,
                   const MassKinematics& mk) {
  const Vec3 r = orientation * mk.position;
  const Vec3 v = orientation * mk.velocity;
  const Vec3 a = orientation * mk.acceleration;
  return angular_velocity.cross(angular_velocity.cross(r)) +
         2.0 * angular_velocity.cross(v) + a;
}

Mat3 inertia_about_contact(const RobotParams& p, const Mat3& orientation,
                           std::span<const MassKinematics> masses) {
  const double R = p.shell_radius;
  Mat3 L = p.shell_inertia * Mat3::Identity();
  // carried mass on the lever arm R z_hat, but only its horizontal components
  // resist rotation about the contact point
  Mat3 horizontal = Mat3::Identity();
  horizontal(2, 2) = 0.0;
  L += p.carried_mass() * R * R * horizontal;
  for (const MassKinematics& mk : masses) {
    const Vec3 u = R * Vec3::UnitZ() + orientation * mk.position;
    L += mk.mass * (u.squaredNorm() * Mat3::Identity() - u * u.transpose());
  }
  return L;
}

Vec3 contact_torque(const RobotParams& p, const Vec3& angular_velocity,
                    const Mat3& orientation, std::span<const MassKinematics> masses,
                    const Vec3& external_force, const Vec3& external_torque) {
  const Vec3 lever = p.shell_radius * Vec3::UnitZ();
  Vec3 rhs = lever.cross(external_force) + external_torque;
  for (const MassKinematics& mk : masses) {
    const Vec3 u = lever + orientation * mk.position;
    const Vec3 h = inertial_term(angular_velocity, orientation, mk);
    rhs += mk.mass * u.cross(-h - p.gravity * Vec3::UnitZ());
  }
  return rhs;
}

Vec3 angular_acceleration(const RobotParams& p, const ShellState& st,
                          std::span<const MassKinematics> masses,
                          const Vec3& external_force, const Vec3& external_torque) {
  const Mat3 L = inertia_about_contact(p, st.orientation, masses);
  const double det = L.determinant();
  if (!(std::abs(det) > 0.0)) throw SingularInertia("inertia operator is singular");
  const Mat3 Linv = L.inverse();  // closed-form adjugate / det for 3x3
  if (L.norm() * Linv.norm() > 1e12)
    throw SingularInertia("inertia operator is numerically singular");
  return Linv * contact_torque(p, st.angular_velocity, st.orientation, masses,
                               external_force, external_torque);
}

ContactReport contact_force(const RobotParams& p, const ShellState& st,
                            const Vec3& center_accel, const Vec3& mass_accel_ground,
                            const Vec3& external_force) {
  (void)st;
  ContactReport rep;
  rep.force = p.carried_mass() * center_accel +
              p.pendulum_mass * mass_accel_ground +
              p.total_mass() * p.gravity * Vec3::UnitZ() - external_force;
  const double normal = rep.force.z();
  const double norm = rep.force.norm();
  rep.normal_positive = normal > 0.0;
  // tangential / normal <= friction, phrased against the full force magnitude
  rep.within_friction_cone =
      norm == 0.0 ||
      normal / norm >= 1.0 / std::sqrt(1.0 + p.friction * p.friction);
  return rep;
}

double mechanical_energy(const RobotParams& p, const ShellState& st) {
  const MassKinematics mk =
      pendulum_kinematics(p, st.pendulum_angle, st.drive_speed, 0.0);
  const Vec3 center_vel =
      st.angular_velocity.cross(p.shell_radius * Vec3::UnitZ());
  const Vec3 r = st.orientation * mk.position;
  const Vec3 mass_vel = center_vel + st.angular_velocity.cross(r) +
                        st.orientation * mk.velocity;
  double e = 0.5 * p.shell_inertia * st.angular_velocity.squaredNorm();
  e += 0.5 * p.carried_mass() * center_vel.squaredNorm();
  e += 0.5 * p.pendulum_mass * mass_vel.squaredNorm();
  e += p.carried_mass() * p.gravity * st.center.z();
  e += p.pendulum_mass * p.gravity * (st.center.z() + r.z());
  return e;
}

double motor_power(const RobotParams& p, const ShellState& st, double theta_ddot) {
  const MassKinematics mk =
      pendulum_kinematics(p, st.pendulum_angle, st.drive_speed, theta_ddot);
  const MassKinematics arr[] = {mk};
  const Vec3 wdot = angular_acceleration(p, st, arr, Vec3::Zero(),
                                         -p.damping * st.angular_velocity);
  const Vec3 r = st.orientation * mk.position;
  const Vec3 center_accel = wdot.cross(p.shell_radius * Vec3::UnitZ());
  const Vec3 mass_accel = center_accel + wdot.cross(r) +
                          inertial_term(st.angular_velocity, st.orientation, mk);
  const Vec3 force = p.pendulum_mass * (mass_accel + p.gravity * Vec3::UnitZ());
  return force.dot(st.orientation * mk.velocity);
}

}  // namespace rollbot
