#include "rollbot/integrator.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rollbot/errors.hpp"

namespace rollbot {

DriveProfile::DriveProfile(double start_time, double initial_speed,
                           std::vector<DriveSegment> segments) {
  knots_.push_back({start_time, initial_speed, 0.0});
  double prev_start = start_time;
  bool first = true;
  for (const DriveSegment& seg : segments) {
    if (seg.start_time < start_time ||
        (!first && seg.start_time <= prev_start))
      throw OutOfRange("drive segments must start in increasing order");
    const double w = speed(seg.start_time);
    // a later segment may preempt an unfinished ramp
    while (!knots_.empty() && knots_.back().t >= seg.start_time)
      knots_.pop_back();
    const double gap = seg.target_speed - w;
    if (gap == 0.0) {
      knots_.push_back({seg.start_time, w, 0.0});
    } else {
      if (!(seg.accel_limit > 0.0))
        throw OutOfRange("drive segment needs a positive accel limit");
      const double a = std::copysign(seg.accel_limit, gap);
      knots_.push_back({seg.start_time, w, a});
      knots_.push_back(
          {seg.start_time + gap / a, seg.target_speed, 0.0});
    }
    prev_start = seg.start_time;
    first = false;
  }
}

DriveProfile DriveProfile::constant(double speed) {
  return DriveProfile(0.0, speed, {});
}

const DriveProfile::Knot& DriveProfile::knot_at(double t) const {
  auto it = std::upper_bound(
      knots_.begin(), knots_.end(), t,
      [](double lhs, const Knot& k) { return lhs < k.t; });
  if (it == knots_.begin()) return knots_.front();
  return *(it - 1);
}

double DriveProfile::speed(double t) const {
  const Knot& k = knot_at(t);
  if (t <= k.t) return k.speed;
  return k.speed + k.accel * (t - k.t);
}

double DriveProfile::accel(double t) const {
  if (t < knots_.front().t) return 0.0;
  return knot_at(t).accel;
}

double DriveProfile::angle_increment(double t0, double t1) const {
  if (t1 < t0) return -angle_increment(t1, t0);
  // closed-form integral of the piecewise-linear speed
  auto angle_from_start = [this](double t) {
    const double tf = knots_.front().t;
    if (t <= tf) return knots_.front().speed * (t - tf);
    double total = 0.0;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
      const double seg_end =
          (i + 1 < knots_.size()) ? std::min(knots_[i + 1].t, t) : t;
      const double d = seg_end - knots_[i].t;
      if (d > 0.0)
        total += knots_[i].speed * d + 0.5 * knots_[i].accel * d * d;
      if (seg_end >= t) break;
    }
    return total;
  };
  return angle_from_start(t1) - angle_from_start(t0);
}

namespace {

struct Derivative {
  Mat3 orientation_dot;
  Vec3 angular_accel;
  Vec3 center_dot;
};

Derivative evaluate_dynamics(const RobotParams& p, const Mat3& orientation,
                             const Vec3& angular_velocity, double theta,
                             double theta_dot, double theta_ddot,
                             const SimOptions& opts) {
  const MassKinematics mk =
      pendulum_kinematics(p, theta, theta_dot, theta_ddot);
  const MassKinematics masses[] = {mk};
  ShellState st;
  st.orientation = orientation;
  st.angular_velocity = angular_velocity;
  Derivative d;
  d.angular_accel =
      angular_acceleration(p, st, masses, opts.external_force,
                           -p.damping * angular_velocity);
  d.orientation_dot = skew(angular_velocity) * orientation;
  d.center_dot =
      angular_velocity.cross(p.shell_radius * Vec3::UnitZ());
  return d;
}

}  // namespace

ContactReport evaluate_contact(const RobotParams& p, const ShellState& st,
                               const DriveProfile& drive, double t,
                               const SimOptions& opts) {
  const MassKinematics mk = pendulum_kinematics(p, st.pendulum_angle,
                                                drive.speed(t), drive.accel(t));
  const MassKinematics masses[] = {mk};
  const Vec3 wdot =
      angular_acceleration(p, st, masses, opts.external_force,
                           -p.damping * st.angular_velocity);
  const Vec3 center_accel = wdot.cross(p.shell_radius * Vec3::UnitZ());
  const Vec3 r = st.orientation * mk.position;
  const Vec3 mass_accel =
      center_accel + wdot.cross(r) +
      inertial_term(st.angular_velocity, st.orientation, mk);
  return contact_force(p, st, center_accel, mass_accel, opts.external_force);
}

ShellState step(const RobotParams& p, const ShellState& st,
                const DriveProfile& drive, double t, double dt,
                const SimOptions& opts) {
  if (!(dt > 0.0) || dt > 0.01)
    throw OutOfRange("step size must lie in (0, 0.01] s");
  auto stage = [&](double tau, const Mat3& T, const Vec3& w) {
    const double theta = st.pendulum_angle + drive.angle_increment(t, tau);
    return evaluate_dynamics(p, T, w, theta, drive.speed(tau),
                             drive.accel(tau), opts);
  };
  const double half = 0.5 * dt;
  const Derivative k1 = stage(t, st.orientation, st.angular_velocity);
  const Derivative k2 =
      stage(t + half, st.orientation + half * k1.orientation_dot,
            st.angular_velocity + half * k1.angular_accel);
  const Derivative k3 =
      stage(t + half, st.orientation + half * k2.orientation_dot,
            st.angular_velocity + half * k2.angular_accel);
  const Derivative k4 =
      stage(t + dt, st.orientation + dt * k3.orientation_dot,
            st.angular_velocity + dt * k3.angular_accel);

  const double w1 = dt / 6.0;
  ShellState out;
  out.orientation = orthonormalize(
      st.orientation + w1 * (k1.orientation_dot + 2.0 * k2.orientation_dot +
                             2.0 * k3.orientation_dot + k4.orientation_dot));
  out.angular_velocity =
      st.angular_velocity + w1 * (k1.angular_accel + 2.0 * k2.angular_accel +
                                  2.0 * k3.angular_accel + k4.angular_accel);
  out.center = st.center + w1 * (k1.center_dot + 2.0 * k2.center_dot +
                                 2.0 * k3.center_dot + k4.center_dot);
  out.pendulum_angle = st.pendulum_angle + drive.angle_increment(t, t + dt);
  out.drive_speed = drive.speed(t + dt);

  if (opts.strict_contact) {
    const ContactReport rep = evaluate_contact(p, out, drive, t + dt, opts);
    if (!rep.normal_positive)
      throw ContactViolation("shell left the ground", t + dt);
    if (!rep.within_friction_cone)
      throw ContactViolation("contact force left the friction cone", t + dt);
  }
  return out;
}

Trajectory simulate(const RobotParams& p, const ShellState& initial,
                    const DriveProfile& drive, double duration, double dt,
                    double stride, const SimOptions& opts) {
  if (!(dt > 0.0)) throw OutOfRange("step size must be positive");
  if (duration < 0.0) throw OutOfRange("duration must be non-negative");
  if (stride <= 0.0) stride = dt;
  const long per = std::lround(stride / dt);
  if (per < 1 || std::abs(per * dt - stride) > 1e-9 * std::max(1.0, stride))
    throw OutOfRange("output stride must be a multiple of the step size");
  const long n = std::lround(duration / dt);

  Trajectory traj;
  traj.stride = stride;
  traj.samples.reserve(static_cast<std::size_t>(n / per) + 2);
  ShellState st = initial;
  traj.samples.push_back({0.0, st, evaluate_contact(p, st, drive, 0.0, opts)});
  for (long k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) * dt;
    st = step(p, st, drive, t, dt, opts);
    if ((k + 1) % per == 0 || k + 1 == n) {
      const double ts = static_cast<double>(k + 1) * dt;
      traj.samples.push_back({ts, st, evaluate_contact(p, st, drive, ts, opts)});
    }
  }
  return traj;
}

CircleFit fit_circle(std::span<const Vec3> points) {
  if (points.size() < 3)
    throw DegenerateInput("circle fit needs at least three points");
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd A(n, 3);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = points[i].x();
    const double yy = points[i].y();
    A.row(i) << 2.0 * x, 2.0 * yy, 1.0;
    y(i) = x * x + yy * yy;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.singularValues()(2) <
      1e-9 * std::max(svd.singularValues()(0), 1.0))
    throw DegenerateInput("circle fit points are collinear");
  const Eigen::Vector3d sol = svd.solve(y);

  CircleFit fit;
  fit.center = Vec3(sol(0), sol(1), 0.0);
  fit.radius =
      std::sqrt(std::max(0.0, sol(2) + sol(0) * sol(0) + sol(1) * sol(1)));
  double rss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d =
        (points[i].head<2>() - fit.center.head<2>()).norm() - fit.radius;
    rss += d * d;
  }
  fit.residual = std::sqrt(rss / static_cast<double>(n));
  return fit;
}

}  // namespace rollbot
