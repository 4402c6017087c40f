#include "rollbot/controller.hpp"

#include <algorithm>
#include <cmath>

#include "rollbot/errors.hpp"

namespace rollbot {

Vec3 estimate_center(const Pose& pose, double orbit_radius) {
  return pose.position - orbit_radius * Vec3(std::cos(pose.radial_azimuth),
                                             std::sin(pose.radial_azimuth), 0.0);
}

ControlOutput control_step(const ControllerState& cs, const Pose& pose,
                           const WaypointTask& task,
                           const EquilibriumTable& table, double dt) {
  if (!(dt > 0.0)) throw OutOfRange("controller period must be positive");
  if (pose.t <= cs.last_pose_time)
    throw StalePose("pose timestamp did not advance");
  if (std::isfinite(cs.last_pose_time) &&
      pose.t - cs.last_pose_time > cs.limits.max_pose_age)
    throw StalePose("pose feed gap exceeds the configured age limit");

  const Vec3 radial_dir(std::cos(pose.radial_azimuth),
                        std::sin(pose.radial_azimuth), 0.0);
  const double commanded_radius = table.orbit_radius_at(cs.command);
  const Vec3 center = pose.position - commanded_radius * radial_dir;
  const double error = (task.orbit_center - center).dot(radial_dir);

  const double error_rate =
      cs.has_last_error ? (error - cs.last_error) / dt : 0.0;
  const double trial_integral = cs.integral + error * dt;
  const double radius_rate =
      -(cs.gains.proportional * error + cs.gains.integral * trial_integral +
        cs.gains.derivative * error_rate);

  const double slope = table.radius_slope(cs.command);
  if (!(std::abs(slope) > 1e-9))
    throw DegenerateInput("radius/speed sensitivity vanished; cannot steer");
  const double raw_rate = radius_rate / slope;
  const double rate = std::clamp(raw_rate, -cs.limits.max_command_rate,
                                 cs.limits.max_command_rate);

  const double lo = std::max(table.drive_speed_for_radius(cs.limits.min_radius),
                             cs.limits.min_drive_speed);
  const double hi = table.drive_speed_for_radius(cs.limits.max_radius);
  double command = cs.command + rate * dt;
  const bool clamped = command < lo || command > hi || rate != raw_rate;
  command = std::clamp(command, lo, hi);

  ControlOutput out;
  out.state = cs;
  out.state.command = command;
  out.state.integral = clamped ? cs.integral : trial_integral;
  out.state.last_error = error;
  out.state.has_last_error = true;
  out.state.last_pose_time = pose.t;
  out.command = command;
  out.error = error;
  out.estimated_center = center;
  return out;
}

WaypointTask plan_waypoint(const Vec3& goal,
                           const std::optional<Vec3>& crossing_velocity,
                           const EquilibriumTable& table,
                           const ControlLimits& limits, double stop_radius,
                           const Vec3& approach_from) {
  WaypointTask task;
  task.goal = goal;
  Vec3 travel_dir;
  if (crossing_velocity) {
    const double speed = crossing_velocity->head<2>().norm();
    if (!(speed > 0.0))
      throw InfeasibleSpeed("crossing velocity must be nonzero");
    task.cross_drive_speed = table.drive_speed_for_travel(speed);
    task.orbit_radius = table.orbit_radius_at(task.cross_drive_speed);
    if (task.orbit_radius < limits.min_radius - 1e-9 ||
        task.orbit_radius > limits.max_radius + 1e-9)
      throw InfeasibleSpeed(
          "crossing speed demands an orbit radius outside the limits");
    travel_dir = Vec3(crossing_velocity->x(), crossing_velocity->y(), 0.0) / speed;
  } else {
    task.stop = true;
    task.orbit_radius =
        std::clamp(stop_radius, limits.min_radius, limits.max_radius);
    task.cross_drive_speed = table.drive_speed_for_radius(task.orbit_radius);
    Vec3 approach = goal - approach_from;
    approach.z() = 0.0;
    if (approach.norm() < 1e-9)
      throw DegenerateInput("stop waypoint coincides with the approach point");
    travel_dir = approach / approach.norm();
  }
  // counter-clockwise: the orbit center sits 90 degrees left of travel
  task.orbit_center =
      task.goal + task.orbit_radius * Vec3::UnitZ().cross(travel_dir);
  return task;
}

bool stop_trigger(const Pose& pose, const WaypointTask& task,
                  double revolve_rate, double stop_lead_time) {
  if (!(revolve_rate > 0.0)) return false;
  const Vec3 to_robot = pose.position - task.orbit_center;
  const Vec3 to_goal = task.goal - task.orbit_center;
  const double robot_azimuth = std::atan2(to_robot.y(), to_robot.x());
  const double goal_azimuth = std::atan2(to_goal.y(), to_goal.x());
  double remaining = wrap_angle(goal_azimuth - robot_azimuth);
  // a small negative remainder means the goal azimuth was just crossed
  if (remaining < -0.05) remaining += 2.0 * M_PI;
  return remaining / revolve_rate <= stop_lead_time;
}

HeadingEstimator::HeadingEstimator(double blend, double min_speed)
    : blend_(blend), min_speed_(min_speed) {}

std::optional<Pose> HeadingEstimator::update(const Vec3& position, double t,
                                             double predicted_turn_rate) {
  if (!has_prev_) {
    has_prev_ = true;
    prev_position_ = position;
    prev_t_ = t;
    return std::nullopt;
  }
  const double dt = t - prev_t_;
  if (!(dt > 0.0)) throw StalePose("position sample time did not advance");
  Vec3 disp = position - prev_position_;
  disp.z() = 0.0;
  const double speed = disp.norm() / dt;
  prev_position_ = position;
  prev_t_ = t;

  if (!locked_) {
    if (speed < min_speed_) return std::nullopt;
    heading_ = std::atan2(disp.y(), disp.x());
    locked_ = true;
  } else {
    heading_ = wrap_angle(heading_ + predicted_turn_rate * dt);
    if (speed >= min_speed_) {
      const double measured = std::atan2(disp.y(), disp.x());
      heading_ = wrap_angle(heading_ + blend_ * wrap_angle(measured - heading_));
    }
  }
  return Pose{position, wrap_angle(heading_ - M_PI / 2.0), t};
}

void PoseMailbox::post(const Pose& pose) {
  const std::lock_guard<std::mutex> lock(mutex_);
  if (!slot_ || pose.t >= slot_->t) slot_ = pose;
}

std::optional<Pose> PoseMailbox::take() {
  const std::lock_guard<std::mutex> lock(mutex_);
  std::optional<Pose> out;
  slot_.swap(out);
  return out;
}

}  // namespace rollbot
