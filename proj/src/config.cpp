#include "rollbot/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rollbot/errors.hpp"

namespace rollbot {

using json = nlohmann::ordered_json;

namespace {

void warn_unknown(const json& j, std::initializer_list<const char*> known,
                  const std::string& prefix,
                  std::vector<std::string>* warnings) {
  if (!warnings || !j.is_object()) return;
  for (const auto& [key, value] : j.items()) {
    bool found = false;
    for (const char* k : known)
      if (key == k) {
        found = true;
        break;
      }
    if (!found)
      warnings->push_back("unknown field ignored: " + prefix + key);
  }
}

double num_or(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number())
    throw SchemaError(std::string("field is not a number: ") + key);
  return j.at(key).get<double>();
}

void parse_robot(const json& j, RobotParams& p,
                 std::vector<std::string>* warnings) {
  warn_unknown(j,
               {"shell_radius", "shell_mass", "shell_inertia", "cone_angle",
                "pendulum_offset", "pendulum_mass", "bead_mass", "damping",
                "friction", "gravity"},
               "robot.", warnings);
  p.shell_radius = num_or(j, "shell_radius", p.shell_radius);
  p.shell_mass = num_or(j, "shell_mass", p.shell_mass);
  p.shell_inertia = num_or(j, "shell_inertia", p.shell_inertia);
  p.cone_angle = num_or(j, "cone_angle", p.cone_angle);
  p.pendulum_offset = num_or(j, "pendulum_offset", p.pendulum_offset);
  p.pendulum_mass = num_or(j, "pendulum_mass", p.pendulum_mass);
  p.bead_mass = num_or(j, "bead_mass", p.bead_mass);
  p.damping = num_or(j, "damping", p.damping);
  p.friction = num_or(j, "friction", p.friction);
  p.gravity = num_or(j, "gravity", p.gravity);
}

void parse_controller(const json& j, ControllerConfig& c,
                      std::vector<std::string>* warnings) {
  warn_unknown(j,
               {"rate_hz", "nominal_trim_rate", "gains", "limits", "heading",
                "stop"},
               "controller.", warnings);
  c.rate_hz = num_or(j, "rate_hz", c.rate_hz);
  c.nominal_trim_rate = num_or(j, "nominal_trim_rate", c.nominal_trim_rate);
  if (j.contains("gains")) {
    const json& g = j.at("gains");
    warn_unknown(g, {"proportional", "integral", "derivative"},
                 "controller.gains.", warnings);
    c.gains.proportional = num_or(g, "proportional", c.gains.proportional);
    c.gains.integral = num_or(g, "integral", c.gains.integral);
    c.gains.derivative = num_or(g, "derivative", c.gains.derivative);
  }
  if (j.contains("limits")) {
    const json& l = j.at("limits");
    warn_unknown(l,
                 {"min_radius", "max_radius", "max_command_rate",
                  "min_drive_speed", "max_pose_age"},
                 "controller.limits.", warnings);
    c.limits.min_radius = num_or(l, "min_radius", c.limits.min_radius);
    c.limits.max_radius = num_or(l, "max_radius", c.limits.max_radius);
    c.limits.max_command_rate =
        num_or(l, "max_command_rate", c.limits.max_command_rate);
    c.limits.min_drive_speed =
        num_or(l, "min_drive_speed", c.limits.min_drive_speed);
    c.limits.max_pose_age = num_or(l, "max_pose_age", c.limits.max_pose_age);
  }
  if (j.contains("heading")) {
    const json& h = j.at("heading");
    warn_unknown(h, {"blend", "min_speed"}, "controller.heading.", warnings);
    c.heading.blend = num_or(h, "blend", c.heading.blend);
    c.heading.min_speed = num_or(h, "min_speed", c.heading.min_speed);
  }
  if (j.contains("stop")) {
    const json& s = j.at("stop");
    warn_unknown(s,
                 {"lead_time", "ramp_rate", "settle_time", "default_radius",
                  "capture_tolerance"},
                 "controller.stop.", warnings);
    c.stop.lead_time = num_or(s, "lead_time", c.stop.lead_time);
    c.stop.ramp_rate = num_or(s, "ramp_rate", c.stop.ramp_rate);
    c.stop.settle_time = num_or(s, "settle_time", c.stop.settle_time);
    c.stop.default_radius = num_or(s, "default_radius", c.stop.default_radius);
    c.stop.capture_tolerance =
        num_or(s, "capture_tolerance", c.stop.capture_tolerance);
  }
}

std::vector<double> number_list(const json& j, const char* key) {
  std::vector<double> out;
  for (const json& v : j.at(key)) {
    if (!v.is_number())
      throw SchemaError(std::string("list holds a non-number: ") + key);
    out.push_back(v.get<double>());
  }
  return out;
}

std::array<double, 2> pair_or(const json& j, const char* key,
                              std::array<double, 2> fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_array() || v.size() != 2)
    throw SchemaError(std::string("field is not an [x, y] pair: ") + key);
  return {v.at(0).get<double>(), v.at(1).get<double>()};
}

WaypointSpec parse_waypoint_entry(const json& j, std::size_t index) {
  if (!j.is_object())
    throw SchemaError("waypoint " + std::to_string(index) +
                      " is not an object");
  for (const char* required : {"x", "y"}) {
    if (!j.contains(required))
      throw SchemaError("waypoint " + std::to_string(index) +
                        " missing required field: " + required);
  }
  WaypointSpec wp;
  wp.x = j.at("x").get<double>();
  wp.y = j.at("y").get<double>();
  if (j.contains("speed")) {
    const json& s = j.at("speed");
    if (s.is_string()) {
      if (s.get<std::string>() != "stop")
        throw SchemaError("waypoint " + std::to_string(index) +
                          " speed must be a number or \"stop\"");
    } else if (s.is_number()) {
      wp.speed = s.get<double>();
    } else {
      throw SchemaError("waypoint " + std::to_string(index) +
                        " speed must be a number or \"stop\"");
    }
  }
  return wp;
}

}  // namespace

ScenarioConfig parse_config(const std::string& text,
                            std::vector<std::string>* warnings) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("config root must be an object");
  if (!j.contains("schema"))
    throw SchemaError("missing required field: schema");
  if (!j.at("schema").is_number_integer() || j.at("schema").get<int>() != 1)
    throw SchemaError("unsupported schema version (expected 1)");

  warn_unknown(j,
               {"schema", "robot", "integrator", "controller", "sweep",
                "open_loop", "circle", "waypoints", "disturbance", "seed",
                "strict_contact"},
               "", warnings);

  ScenarioConfig cfg;
  if (j.contains("robot")) parse_robot(j.at("robot"), cfg.robot, warnings);
  if (j.contains("integrator")) {
    const json& i = j.at("integrator");
    warn_unknown(i, {"time_step", "output_stride"}, "integrator.", warnings);
    cfg.integrator.time_step = num_or(i, "time_step", cfg.integrator.time_step);
    cfg.integrator.output_stride =
        num_or(i, "output_stride", cfg.integrator.output_stride);
  }
  if (j.contains("controller"))
    parse_controller(j.at("controller"), cfg.controller, warnings);
  if (j.contains("sweep")) {
    const json& s = j.at("sweep");
    warn_unknown(s, {"max_drive_speed", "points"}, "sweep.", warnings);
    cfg.sweep.max_drive_speed =
        num_or(s, "max_drive_speed", cfg.sweep.max_drive_speed);
    if (s.contains("points")) cfg.sweep.points = s.at("points").get<int>();
  }
  if (j.contains("open_loop")) {
    const json& o = j.at("open_loop");
    warn_unknown(o,
                 {"drive_speeds", "horizon", "ramp_rate", "tail_window",
                  "radius_rtol", "revolve_rtol", "tilt_atol"},
                 "open_loop.", warnings);
    if (o.contains("drive_speeds"))
      cfg.open_loop.drive_speeds = number_list(o, "drive_speeds");
    cfg.open_loop.horizon = num_or(o, "horizon", cfg.open_loop.horizon);
    cfg.open_loop.ramp_rate = num_or(o, "ramp_rate", cfg.open_loop.ramp_rate);
    cfg.open_loop.tail_window =
        num_or(o, "tail_window", cfg.open_loop.tail_window);
    cfg.open_loop.radius_rtol =
        num_or(o, "radius_rtol", cfg.open_loop.radius_rtol);
    cfg.open_loop.revolve_rtol =
        num_or(o, "revolve_rtol", cfg.open_loop.revolve_rtol);
    cfg.open_loop.tilt_atol = num_or(o, "tilt_atol", cfg.open_loop.tilt_atol);
  }
  if (j.contains("circle")) {
    const json& c = j.at("circle");
    warn_unknown(c,
                 {"radii", "setpoint", "start_offset", "horizon", "tail_window",
                  "capture_radius", "capture_hold", "radius_rtol",
                  "center_atol"},
                 "circle.", warnings);
    if (c.contains("radii")) cfg.circle.radii = number_list(c, "radii");
    cfg.circle.setpoint = pair_or(c, "setpoint", cfg.circle.setpoint);
    cfg.circle.start_offset =
        num_or(c, "start_offset", cfg.circle.start_offset);
    cfg.circle.horizon = num_or(c, "horizon", cfg.circle.horizon);
    cfg.circle.tail_window = num_or(c, "tail_window", cfg.circle.tail_window);
    cfg.circle.capture_radius =
        num_or(c, "capture_radius", cfg.circle.capture_radius);
    cfg.circle.capture_hold =
        num_or(c, "capture_hold", cfg.circle.capture_hold);
    cfg.circle.radius_rtol = num_or(c, "radius_rtol", cfg.circle.radius_rtol);
    cfg.circle.center_atol = num_or(c, "center_atol", cfg.circle.center_atol);
  }
  if (j.contains("waypoints")) {
    const json& w = j.at("waypoints");
    warn_unknown(w,
                 {"points", "start", "stop_tolerance", "spin_up_rate",
                  "leg_timeout"},
                 "waypoints.", warnings);
    if (w.contains("points")) {
      std::size_t index = 0;
      for (const json& e : w.at("points"))
        cfg.waypoints.points.push_back(parse_waypoint_entry(e, index++));
    }
    cfg.waypoints.start = pair_or(w, "start", cfg.waypoints.start);
    cfg.waypoints.stop_tolerance =
        num_or(w, "stop_tolerance", cfg.waypoints.stop_tolerance);
    cfg.waypoints.spin_up_rate =
        num_or(w, "spin_up_rate", cfg.waypoints.spin_up_rate);
    cfg.waypoints.leg_timeout =
        num_or(w, "leg_timeout", cfg.waypoints.leg_timeout);
  }
  if (j.contains("disturbance")) {
    const json& d = j.at("disturbance");
    warn_unknown(d, {"force", "pose_noise"}, "disturbance.", warnings);
    if (d.contains("force")) {
      const json& f = d.at("force");
      if (!f.is_array() || f.size() != 3)
        throw SchemaError("field is not an [x, y, z] triple: force");
      for (int i = 0; i < 3; ++i)
        cfg.disturbance.force[static_cast<std::size_t>(i)] =
            f.at(static_cast<std::size_t>(i)).get<double>();
    }
    cfg.disturbance.pose_noise =
        num_or(d, "pose_noise", cfg.disturbance.pose_noise);
  }
  if (j.contains("seed"))
    cfg.seed = j.at("seed").get<unsigned long long>();
  if (j.contains("strict_contact"))
    cfg.strict_contact = j.at("strict_contact").get<bool>();

  cfg.robot.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path,
                           std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), warnings);
}

std::string serialize_config(const ScenarioConfig& cfg) {
  json j;
  j["schema"] = cfg.schema;
  j["robot"] = {{"shell_radius", cfg.robot.shell_radius},
                {"shell_mass", cfg.robot.shell_mass},
                {"shell_inertia", cfg.robot.shell_inertia},
                {"cone_angle", cfg.robot.cone_angle},
                {"pendulum_offset", cfg.robot.pendulum_offset},
                {"pendulum_mass", cfg.robot.pendulum_mass},
                {"bead_mass", cfg.robot.bead_mass},
                {"damping", cfg.robot.damping},
                {"friction", cfg.robot.friction},
                {"gravity", cfg.robot.gravity}};
  j["integrator"] = {{"time_step", cfg.integrator.time_step},
                     {"output_stride", cfg.integrator.output_stride}};
  j["controller"] = {
      {"rate_hz", cfg.controller.rate_hz},
      {"nominal_trim_rate", cfg.controller.nominal_trim_rate},
      {"gains",
       {{"proportional", cfg.controller.gains.proportional},
        {"integral", cfg.controller.gains.integral},
        {"derivative", cfg.controller.gains.derivative}}},
      {"limits",
       {{"min_radius", cfg.controller.limits.min_radius},
        {"max_radius", cfg.controller.limits.max_radius},
        {"max_command_rate", cfg.controller.limits.max_command_rate},
        {"min_drive_speed", cfg.controller.limits.min_drive_speed},
        {"max_pose_age", cfg.controller.limits.max_pose_age}}},
      {"heading",
       {{"blend", cfg.controller.heading.blend},
        {"min_speed", cfg.controller.heading.min_speed}}},
      {"stop",
       {{"lead_time", cfg.controller.stop.lead_time},
        {"ramp_rate", cfg.controller.stop.ramp_rate},
        {"settle_time", cfg.controller.stop.settle_time},
        {"default_radius", cfg.controller.stop.default_radius},
        {"capture_tolerance", cfg.controller.stop.capture_tolerance}}}};
  j["sweep"] = {{"max_drive_speed", cfg.sweep.max_drive_speed},
                {"points", cfg.sweep.points}};
  j["open_loop"] = {{"drive_speeds", cfg.open_loop.drive_speeds},
                    {"horizon", cfg.open_loop.horizon},
                    {"ramp_rate", cfg.open_loop.ramp_rate},
                    {"tail_window", cfg.open_loop.tail_window},
                    {"radius_rtol", cfg.open_loop.radius_rtol},
                    {"revolve_rtol", cfg.open_loop.revolve_rtol},
                    {"tilt_atol", cfg.open_loop.tilt_atol}};
  j["circle"] = {{"radii", cfg.circle.radii},
                 {"setpoint", cfg.circle.setpoint},
                 {"start_offset", cfg.circle.start_offset},
                 {"horizon", cfg.circle.horizon},
                 {"tail_window", cfg.circle.tail_window},
                 {"capture_radius", cfg.circle.capture_radius},
                 {"capture_hold", cfg.circle.capture_hold},
                 {"radius_rtol", cfg.circle.radius_rtol},
                 {"center_atol", cfg.circle.center_atol}};
  json points = json::array();
  for (const WaypointSpec& wp : cfg.waypoints.points) {
    json e = {{"x", wp.x}, {"y", wp.y}};
    if (wp.speed)
      e["speed"] = *wp.speed;
    else
      e["speed"] = "stop";
    points.push_back(e);
  }
  j["waypoints"] = {{"points", points},
                    {"start", cfg.waypoints.start},
                    {"stop_tolerance", cfg.waypoints.stop_tolerance},
                    {"spin_up_rate", cfg.waypoints.spin_up_rate},
                    {"leg_timeout", cfg.waypoints.leg_timeout}};
  j["disturbance"] = {{"force", cfg.disturbance.force},
                      {"pose_noise", cfg.disturbance.pose_noise}};
  j["seed"] = cfg.seed;
  j["strict_contact"] = cfg.strict_contact;
  return j.dump(2) + "\n";
}

void save_config(const ScenarioConfig& cfg, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write config file: " + path);
  out << serialize_config(cfg);
}

std::vector<WaypointSpec> parse_waypoints(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(std::string("waypoint file is not valid JSON: ") +
                      e.what());
  }
  if (!j.is_array()) throw SchemaError("waypoint file must be a JSON list");
  std::vector<WaypointSpec> out;
  std::size_t index = 0;
  for (const json& e : j) out.push_back(parse_waypoint_entry(e, index++));
  return out;
}

std::vector<WaypointSpec> load_waypoints(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open waypoint file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_waypoints(buf.str());
}

std::vector<WaypointSpec> default_waypoints() {
  // the four vertexes of an N drawn at 1 m scale, all stops
  return {{0.0, 0.0, std::nullopt},
          {0.0, 1.0, std::nullopt},
          {1.0, 0.0, std::nullopt},
          {1.0, 1.0, std::nullopt}};
}

}  // namespace rollbot
