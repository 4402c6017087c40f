#pragma once

// Configuration for the scenario harness: robot parameters, integrator and
// controller settings, scenario definitions and pass/fail tolerances, all
// serializable to a versioned JSON document. Unknown fields warn, missing
// required fields error; re-serialization is canonical (byte-stable).

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rollbot/controller.hpp"

namespace rollbot {

struct IntegratorConfig {
  double time_step = 1e-3;     // s
  double output_stride = 0.01; // s between recorded samples
};

struct HeadingConfig {
  double blend = 0.3;      // correction weight per sample
  double min_speed = 0.02; // m/s below which displacement direction is noise
};

struct StopConfig {
  double lead_time = 0.15;         // s, trigger this far before the goal azimuth
  double ramp_rate = 30.0;         // rad/s^2 motor ramp-down
  double settle_time = 15.0;       // s of free rocking after the motor stops
  double default_radius = 0.18;    // m, orbit used to approach stop waypoints
  double capture_tolerance = 0.03; // m, radial band that arms the stop trigger
};

struct ControllerConfig {
  double rate_hz = 20.0;
  // slow pull of the command toward the task's nominal drive speed; the
  // center-of-curvature feedback alone leaves the orbit radius unregulated,
  // so the loop trims toward the speed whose natural radius is the target
  double nominal_trim_rate = 0.05; // rad/s^2
  PidGains gains;
  ControlLimits limits;
  HeadingConfig heading;
  StopConfig stop;
};

struct SweepConfig {
  double max_drive_speed = 3.0 * M_PI; // rad/s
  int points = 50;                     // grid size including zero
};

struct OpenLoopConfig {
  std::vector<double> drive_speeds = {0.5 * M_PI, M_PI, 1.5 * M_PI, 2.0 * M_PI};
  double horizon = 120.0;     // s per point
  double ramp_rate = 1.0;     // rad/s^2 spin-up from rest
  double tail_window = 20.0;  // s of trajectory used for the steady-state fit
  double radius_rtol = 0.02;
  double revolve_rtol = 0.02;
  double tilt_atol = 0.5 * M_PI / 180.0; // rad
};

struct CircleConfig {
  std::vector<double> radii = {0.20, 0.35, 0.50, 0.65}; // m setpoints
  std::array<double, 2> setpoint = {0.0, 0.0};          // goal circle center
  double start_offset = 1.0;   // m, initial shell distance from the setpoint
  double horizon = 120.0;      // s
  double tail_window = 30.0;   // s for the steady-state circle fit
  double capture_radius = 0.10; // m center error counting as captured
  double capture_hold = 5.0;    // s the capture must persist
  double radius_rtol = 0.10;
  double center_atol = 0.10;   // m
};

// One waypoint: cross at the given ground speed, or stop there if absent.
struct WaypointSpec {
  double x = 0.0;
  double y = 0.0;
  std::optional<double> speed; // m/s
};

struct WaypointConfig {
  std::vector<WaypointSpec> points; // empty selects the default N-shape course
  std::array<double, 2> start = {-0.5, -0.5};
  double stop_tolerance = 0.07; // m allowed resting distance from each vertex
  double spin_up_rate = 1.0;    // rad/s^2 open-loop ramp after each stop
  double leg_timeout = 90.0;    // s per waypoint before reporting failure
};

struct DisturbanceConfig {
  std::array<double, 3> force = {0.0, 0.0, 0.0}; // N, constant (slope-like)
  double pose_noise = 0.0;                       // m std dev on pose samples
};

struct ScenarioConfig {
  int schema = 1;
  RobotParams robot;
  IntegratorConfig integrator;
  ControllerConfig controller;
  SweepConfig sweep;
  OpenLoopConfig open_loop;
  CircleConfig circle;
  WaypointConfig waypoints;
  DisturbanceConfig disturbance;
  unsigned long long seed = 0;
  bool strict_contact = false;
};

// Parse/serialize; unknown fields are reported through warnings (if given),
// missing required fields raise SchemaError naming the field.
ScenarioConfig parse_config(const std::string& text,
                            std::vector<std::string>* warnings = nullptr);
ScenarioConfig load_config(const std::string& path,
                           std::vector<std::string>* warnings = nullptr);
std::string serialize_config(const ScenarioConfig& cfg);
void save_config(const ScenarioConfig& cfg, const std::string& path);

// Waypoint course files: JSON list of {x, y, speed|"stop"}.
std::vector<WaypointSpec> parse_waypoints(const std::string& text);
std::vector<WaypointSpec> load_waypoints(const std::string& path);
std::vector<WaypointSpec> default_waypoints(); // N-shaped course, 1 m scale

}  // namespace rollbot
