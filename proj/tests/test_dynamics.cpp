#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "rollbot/dynamics.hpp"
#include "rollbot/errors.hpp"
#include "rollbot/spatial.hpp"

using namespace rollbot;

namespace {

RobotParams params() { return RobotParams{}; }

ShellState spinning_state() {
  ShellState st;
  st.orientation = rotation_y(0.9) * rotation_z(0.3);
  st.angular_velocity = Vec3(0.2, -0.4, 1.3);
  st.center = Vec3(0.5, -0.2, params().shell_radius);
  st.pendulum_angle = 0.7;
  st.drive_speed = 2.0;
  return st;
}

std::vector<MassKinematics> default_masses(const RobotParams& p,
                                           const ShellState& st,
                                           double theta_ddot = 0.0) {
  return {pendulum_kinematics(p, st.pendulum_angle, st.drive_speed,
                              theta_ddot)};
}

// Pendulum position recomputed in extended precision, for differencing.
using Vec3l = Vec3T<long double>;
Vec3l pendulum_pos_l(const RobotParams& p, long double theta) {
  const long double phi = p.cone_angle;
  return p.pendulum_offset *
         Vec3l(std::sin(phi) * std::cos(theta), std::sin(phi) * std::sin(theta),
               -std::cos(phi));
}

}  // namespace

TEST_CASE("parameter defaults describe a valid robot") {
  CHECK_NOTHROW(params().validate());
  CHECK(params().carried_mass() == doctest::Approx(0.880));
  CHECK(params().total_mass() == doctest::Approx(1.186));
}

TEST_CASE("parameter validation rejects out-of-range values") {
  auto bad = params();
  bad.shell_radius = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = params();
  bad.pendulum_offset = bad.shell_radius;  // pendulum on the shell surface
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = params();
  bad.cone_angle = M_PI / 2.0;
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = params();
  bad.damping = -1e-9;
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = params();
  bad.shell_inertia = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidState);
  bad = params();
  bad.gravity = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidState);
}

TEST_CASE("pendulum rest position sits on the cone") {
  const auto p = params();
  const MassKinematics mk = pendulum_kinematics(p, 0.0, 0.0, 0.0);
  const double leg = p.pendulum_offset / std::sqrt(2.0);  // 45 degree cone
  CHECK(mk.position.x() == doctest::Approx(leg).epsilon(1e-12));
  CHECK(mk.position.y() == doctest::Approx(0.0));
  CHECK(mk.position.z() == doctest::Approx(-leg).epsilon(1e-12));
  CHECK(mk.position.norm() == doctest::Approx(p.pendulum_offset));
  CHECK(mk.mass == doctest::Approx(p.pendulum_mass));
  // at zero rates nothing moves
  CHECK(mk.velocity.norm() == 0.0);
  CHECK(mk.acceleration.norm() == 0.0);
}

TEST_CASE("pendulum velocity and acceleration match extended-precision differences") {
  const auto p = params();
  // theta(t) = th0 + w t + 0.5 a t^2 around t = 0
  const double th0 = 1.234, w = 2.1, a = -0.8;
  const MassKinematics mk = pendulum_kinematics(p, th0, w, a);
  const long double h = 1e-6L;
  const auto pos = [&](long double t) {
    return pendulum_pos_l(p, th0 + w * t + 0.5L * a * t * t);
  };
  const Vec3l v_fd = (pos(h) - pos(-h)) / (2.0L * h);
  const Vec3l acc_fd = (pos(h) - 2.0L * pos(0.0L) + pos(-h)) / (h * h);
  CHECK((mk.velocity.cast<long double>() - v_fd).norm() < 1e-9);
  CHECK((mk.acceleration.cast<long double>() - acc_fd).norm() < 1e-6);
  // the mass never leaves the cone
  CHECK(mk.position.norm() == doctest::Approx(p.pendulum_offset));
  CHECK(std::abs(mk.position.dot(mk.velocity)) < 1e-15);
}

TEST_CASE("inertial term matches a frame-transport finite difference") {
  const auto p = params();
  const ShellState st = spinning_state();
  const MassKinematics mk =
      pendulum_kinematics(p, st.pendulum_angle, st.drive_speed, -0.6);
  const Vec3 h = inertial_term(st.angular_velocity, st.orientation, mk);

  // ground position of the mass under rotating frame + internal motion,
  // differenced in long double: r(t) = exp(skew(w) t) T (pos + vel t + ...)
  const long double dt = 1e-6L;
  const auto ground = [&](long double t) -> Vec3l {
    const Vec3 wt = st.angular_velocity * static_cast<double>(t);
    const Mat3T<long double> rot = so3_exp(wt).cast<long double>();
    const Vec3l body = mk.position.cast<long double>() +
                       mk.velocity.cast<long double>() * t +
                       0.5L * mk.acceleration.cast<long double>() * t * t;
    return rot * st.orientation.cast<long double>() * body;
  };
  const Vec3l acc_fd = (ground(dt) - 2.0L * ground(0.0L) + ground(-dt)) / (dt * dt);
  CHECK((h.cast<long double>() - acc_fd).norm() < 1e-5);
}

TEST_CASE("contact inertia operator is symmetric positive definite") {
  const auto p = params();
  const ShellState st = spinning_state();
  const auto masses = default_masses(p, st);
  const Mat3 L = inertia_about_contact(p, st.orientation, masses);
  CHECK((L - L.transpose()).norm() < 1e-15);
  const Eigen::SelfAdjointEigenSolver<Mat3> es(L);
  CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("contact inertia with no internal masses reduces to the bare shell") {
  const auto p = params();
  const Mat3 L = inertia_about_contact(p, Mat3::Identity(), {});
  Mat3 expected = p.shell_inertia * Mat3::Identity();
  expected(0, 0) += p.carried_mass() * p.shell_radius * p.shell_radius;
  expected(1, 1) += p.carried_mass() * p.shell_radius * p.shell_radius;
  CHECK((L - expected).norm() < 1e-15);
}

TEST_CASE("inertia and torque are additive over mass subdivision") {
  const auto p = params();
  const ShellState st = spinning_state();
  const MassKinematics whole =
      pendulum_kinematics(p, st.pendulum_angle, st.drive_speed, 0.25);
  // the same point mass split into three unequal parts
  std::vector<MassKinematics> split(3, whole);
  split[0].mass = 0.5 * whole.mass;
  split[1].mass = 0.3 * whole.mass;
  split[2].mass = 0.2 * whole.mass;
  std::vector<MassKinematics> single{whole};

  const Mat3 L1 = inertia_about_contact(p, st.orientation, single);
  const Mat3 L3 = inertia_about_contact(p, st.orientation, split);
  CHECK((L1 - L3).norm() < 1e-12);

  const Vec3 f(0.3, -0.1, 0.05), tau(0.01, 0.02, -0.03);
  const Vec3 t1 =
      contact_torque(p, st.angular_velocity, st.orientation, single, f, tau);
  const Vec3 t3 =
      contact_torque(p, st.angular_velocity, st.orientation, split, f, tau);
  CHECK((t1 - t3).norm() < 1e-12);

  const Vec3 a1 = angular_acceleration(p, st, single, f, tau);
  const Vec3 a3 = angular_acceleration(p, st, split, f, tau);
  CHECK((a1 - a3).norm() < 1e-10);
}

TEST_CASE("angular acceleration solves the stated moment balance") {
  const auto p = params();
  const ShellState st = spinning_state();
  const auto masses = default_masses(p, st, 0.4);
  const Vec3 f(0.2, 0.0, -0.1), tau(0.0, 0.05, 0.01);
  const Vec3 wdot = angular_acceleration(p, st, masses, f, tau);
  const Mat3 L = inertia_about_contact(p, st.orientation, masses);
  const Vec3 rhs =
      contact_torque(p, st.angular_velocity, st.orientation, masses, f, tau);
  CHECK((L * wdot - rhs).norm() < 1e-12);
}

TEST_CASE("angular acceleration against an independent 3x3 Cramer solve") {
  const auto p = params();
  const ShellState st = spinning_state();
  const auto masses = default_masses(p, st, -0.15);
  const Vec3 f = Vec3::Zero(), tau = Vec3::Zero();
  const Mat3 L = inertia_about_contact(p, st.orientation, masses);
  const Vec3 b =
      contact_torque(p, st.angular_velocity, st.orientation, masses, f, tau);
  Vec3 cramer;
  const double det = L.determinant();
  for (int i = 0; i < 3; ++i) {
    Mat3 Li = L;
    Li.col(i) = b;
    cramer(i) = Li.determinant() / det;
  }
  const Vec3 wdot = angular_acceleration(p, st, masses, f, tau);
  CHECK((wdot - cramer).norm() < 1e-10 * cramer.norm());
}

TEST_CASE("dynamics commute with rotations about the vertical") {
  const auto p = params();
  const ShellState st = spinning_state();
  const auto masses = default_masses(p, st, 0.33);
  const Vec3 f(0.12, -0.07, 0.02), tau(0.004, 0.001, -0.002);
  const Vec3 wdot = angular_acceleration(p, st, masses, f, tau);

  const Mat3 rz = rotation_z(1.234);
  ShellState rotated = st;
  rotated.orientation = rz * st.orientation;
  rotated.angular_velocity = rz * st.angular_velocity;
  rotated.center = rz * st.center;
  const auto masses_r = default_masses(p, rotated, 0.33);
  const Vec3 wdot_r =
      angular_acceleration(p, rotated, masses_r, rz * f, rz * tau);
  CHECK((wdot_r - rz * wdot).norm() < 1e-10);
}

TEST_CASE("ground reaction at rest carries exactly the total weight") {
  const auto p = params();
  ShellState st;
  st.center = Vec3(0.0, 0.0, p.shell_radius);
  const ContactReport c =
      contact_force(p, st, Vec3::Zero(), Vec3::Zero(), Vec3::Zero());
  CHECK(c.force.x() == doctest::Approx(0.0));
  CHECK(c.force.y() == doctest::Approx(0.0));
  CHECK(c.force.z() ==
        doctest::Approx(p.total_mass() * p.gravity).epsilon(1e-12));
  CHECK(c.normal_positive);
  CHECK(c.within_friction_cone);
}

TEST_CASE("contact flags detect lift-off and cone violations") {
  const auto p = params();
  ShellState st;
  st.center = Vec3(0.0, 0.0, p.shell_radius);
  // center accelerating downward faster than gravity: normal must go negative
  const ContactReport lift = contact_force(
      p, st, Vec3(0.0, 0.0, -2.0 * p.gravity), Vec3(0.0, 0.0, -2.0 * p.gravity),
      Vec3::Zero());
  CHECK(!lift.normal_positive);
  // strong sideways acceleration demands more friction than mu allows
  const double ax = 2.0 * p.friction * p.gravity;
  const ContactReport skid = contact_force(p, st, Vec3(ax, 0.0, 0.0),
                                           Vec3(ax, 0.0, 0.0), Vec3::Zero());
  CHECK(skid.normal_positive);
  CHECK(!skid.within_friction_cone);
}

TEST_CASE("mechanical energy responds to pendulum height and spin") {
  const auto p = params();
  ShellState rest;
  rest.center = Vec3(0.0, 0.0, p.shell_radius);
  // tilting the shell against the pendulum's lean raises the mass
  ShellState lifted = rest;
  lifted.orientation = rotation_y(-0.5);
  CHECK(mechanical_energy(p, lifted) > mechanical_energy(p, rest));
  // kinetic part grows with spin
  ShellState fast = rest;
  fast.angular_velocity = Vec3(0.0, 0.0, 3.0);
  CHECK(mechanical_energy(p, fast) > mechanical_energy(p, rest));
}
