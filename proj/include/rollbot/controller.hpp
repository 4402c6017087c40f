#pragma once

// Closed-loop steering. The robot always travels on an arc whose radius is a
// function of motor speed, so the only steering handle is the arc radius. The
// controller estimates the current center of curvature from pose + commanded
// radius, compares it with the goal center, and feeds the radial error through
// a PID into a rate-limited motor-speed command. Rolling direction is
// counter-clockwise (positive revolve rate) throughout.

#include <limits>
#include <mutex>
#include <optional>

#include "rollbot/quasistatic.hpp"

namespace rollbot {

struct Pose {
  Vec3 position = Vec3::Zero();  // shell center, m
  // azimuth of the shell as seen from its curvature center, in (-pi, pi];
  // counter-clockwise travel means the heading is this plus pi/2
  double radial_azimuth = 0.0;
  double t = 0.0;  // sample time, s
};

struct PidGains {
  double proportional = 0.5;  // 1/s
  double integral = 0.05;     // 1/s^2
  double derivative = 0.1;    // dimensionless
};

struct ControlLimits {
  double min_radius = 0.12;       // m, commanded orbit radius band
  double max_radius = 1.28;       // m
  double max_command_rate = 0.5;  // rad/s^2 on the motor speed command
  double min_drive_speed = 0.3;   // rad/s, floor that keeps the robot moving
  double max_pose_age = 0.25;     // s, reject feeds with larger gaps
};

struct ControllerState {
  PidGains gains;
  ControlLimits limits;
  double command = 0.0;   // current motor speed command, rad/s
  double integral = 0.0;  // accumulated radial error, m s
  double last_error = 0.0;
  bool has_last_error = false;
  double last_pose_time = -std::numeric_limits<double>::infinity();
};

// One steering goal: orbit the center until the goal point is crossed
// (optionally coming to a stop there).
struct WaypointTask {
  Vec3 goal = Vec3::Zero();
  Vec3 orbit_center = Vec3::Zero();  // center whose orbit passes the goal
  double orbit_radius = 0.0;         // m
  double cross_drive_speed = 0.0;    // rad/s, motor speed consistent with the crossing
  bool stop = false;
};

// Center of curvature implied by a pose and orbit radius: the center sits
// one radius behind the pose along the radial direction.
Vec3 estimate_center(const Pose& pose, double orbit_radius);

struct ControlOutput {
  ControllerState state;
  double command = 0.0;          // rad/s motor speed to apply for the tick
  double error = 0.0;            // m, radial center offset
  Vec3 estimated_center = Vec3::Zero();
};

// One controller tick: PID on the radial center-offset error, converted to a
// motor-speed rate through the radius/speed sensitivity of the equilibrium
// family, then rate- and radius-clamped (integral frozen while clamped).
ControlOutput control_step(const ControllerState& cs, const Pose& pose,
                           const WaypointTask& task,
                           const EquilibriumTable& table, double dt);

// Builds the steering goal for a waypoint. A crossing velocity picks the
// orbit radius from the equilibrium family at that ground speed; without one
// the waypoint is a stop and uses the given stop radius, approached from the
// direction of approach_from.
WaypointTask plan_waypoint(const Vec3& goal,
                           const std::optional<Vec3>& crossing_velocity,
                           const EquilibriumTable& table,
                           const ControlLimits& limits, double stop_radius,
                           const Vec3& approach_from);

// True when the remaining arc to the goal azimuth, at the given revolve rate,
// will be covered within stop_lead_time.
bool stop_trigger(const Pose& pose, const WaypointTask& task,
                  double revolve_rate, double stop_lead_time);

// Radial azimuth from position fixes alone: dead-reckons between samples with
// the predicted revolve rate and blends in the measured displacement
// direction whenever the robot moves fast enough to trust it.
class HeadingEstimator {
 public:
  explicit HeadingEstimator(double blend = 0.3, double min_speed = 0.02);

  // returns a pose once the heading is locked in; predicted_turn_rate is the
  // expected azimuth rate since the previous sample
  std::optional<Pose> update(const Vec3& position, double t,
                             double predicted_turn_rate);

  bool locked() const { return locked_; }

 private:
  double blend_;
  double min_speed_;
  bool has_prev_ = false;
  bool locked_ = false;
  Vec3 prev_position_ = Vec3::Zero();
  double prev_t_ = 0.0;
  double heading_ = 0.0;  // travel direction; radial azimuth is this - pi/2
};

// Single-slot handoff between a pose producer and the controller: posting
// overwrites anything unread, so the controller only ever sees the newest.
class PoseMailbox {
 public:
  void post(const Pose& pose);
  std::optional<Pose> take();

 private:
  std::mutex mutex_;
  std::optional<Pose> slot_;
};

}  // namespace rollbot
