#include "rollbot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <span>

#include <json.hpp>

#include "rollbot/errors.hpp"

namespace rollbot {

namespace {

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string label_for(const char* key, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s=%.6g", key, v);
  return buf;
}

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write file: " + path);
  return out;
}

int contact_flags(const ContactReport& c) {
  return (c.normal_positive ? 1 : 0) | (c.within_friction_cone ? 2 : 0);
}

double travel_heading(const ShellState& st) {
  const Vec3 v = st.angular_velocity.cross(Vec3::UnitZ());
  return std::atan2(v.y(), v.x());
}

CheckResult make_check(const std::string& name, double value, double bound) {
  return {name, value, bound, value <= bound};
}

void finalize(RunReport& report) {
  for (PointReport& pt : report.points) {
    for (const CheckResult& c : pt.checks)
      if (!c.pass) pt.pass = false;
    if (!pt.failure.empty()) pt.pass = false;
    if (!pt.pass) report.pass = false;
  }
}

}  // namespace

std::string serialize_report(const RunReport& report) {
  nlohmann::ordered_json j;
  j["scenario"] = report.scenario;
  j["pass"] = report.pass;
  j["points"] = nlohmann::ordered_json::array();
  for (const PointReport& pt : report.points) {
    nlohmann::ordered_json p;
    p["label"] = pt.label;
    p["pass"] = pt.pass;
    if (!pt.failure.empty()) p["failure"] = pt.failure;
    p["metrics"] = nlohmann::ordered_json::object();
    for (const auto& [name, value] : pt.metrics) p["metrics"][name] = value;
    p["checks"] = nlohmann::ordered_json::array();
    for (const CheckResult& c : pt.checks)
      p["checks"].push_back({{"name", c.name},
                             {"value", c.value},
                             {"bound", c.bound},
                             {"pass", c.pass}});
    p["artifacts"] = pt.artifacts;
    j["points"].push_back(p);
  }
  return j.dump(2) + "\n";
}

void save_report(const RunReport& report, const std::string& path) {
  open_out(path) << serialize_report(report);
}

std::span<const TrajectorySample> tail_samples(const Trajectory& traj,
                                               double window) {
  if (traj.samples.empty()) return {};
  const double t_end = traj.samples.back().t;
  std::size_t first = 0;
  while (first < traj.samples.size() &&
         traj.samples[first].t < t_end - window)
    ++first;
  return std::span<const TrajectorySample>(traj.samples).subspan(first);
}

std::vector<Vec3> tail_positions(const Trajectory& traj, double window) {
  std::vector<Vec3> out;
  for (const TrajectorySample& s : tail_samples(traj, window))
    out.push_back(s.state.center);
  return out;
}

double fitted_revolve_rate(std::span<const TrajectorySample> tail,
                           const Vec3& center) {
  if (tail.size() < 2)
    throw DegenerateInput("revolve-rate fit needs at least two samples");
  // least-squares slope of the unwrapped azimuth about the center
  double prev = 0.0;
  double unwrapped = 0.0;
  double st = 0.0, sa = 0.0, stt = 0.0, sta = 0.0;
  const double n = static_cast<double>(tail.size());
  for (std::size_t i = 0; i < tail.size(); ++i) {
    const Vec3 d = tail[i].state.center - center;
    const double az = std::atan2(d.y(), d.x());
    if (i == 0)
      unwrapped = az;
    else
      unwrapped += wrap_angle(az - prev);
    prev = az;
    const double t = tail[i].t;
    st += t;
    sa += unwrapped;
    stt += t * t;
    sta += t * unwrapped;
  }
  const double denom = n * stt - st * st;
  if (std::abs(denom) < 1e-12)
    throw DegenerateInput("revolve-rate fit has no time spread");
  return (n * sta - st * sa) / denom;
}

double mean_axis_tilt(std::span<const TrajectorySample> tail) {
  if (tail.empty()) throw DegenerateInput("tilt average over no samples");
  double acc = 0.0;
  for (const TrajectorySample& s : tail)
    acc += std::acos(std::clamp(s.state.orientation(2, 2), -1.0, 1.0));
  return acc / static_cast<double>(tail.size());
}

void write_trajectory_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,x,y,heading,omega0,flags\n";
  for (const TrajectorySample& s : traj.samples) {
    out << format_num(s.t) << ',' << format_num(s.state.center.x()) << ','
        << format_num(s.state.center.y()) << ','
        << format_num(travel_heading(s.state)) << ','
        << format_num(s.state.drive_speed) << ',' << contact_flags(s.contact)
        << '\n';
  }
}

void write_trajectory_json(const Trajectory& traj, const std::string& path) {
  nlohmann::ordered_json j;
  j["stride"] = traj.stride;
  j["samples"] = nlohmann::ordered_json::array();
  for (const TrajectorySample& s : traj.samples) {
    j["samples"].push_back(
        {{"t", s.t},
         {"x", s.state.center.x()},
         {"y", s.state.center.y()},
         {"heading", travel_heading(s.state)},
         {"omega0", s.state.drive_speed},
         {"flags", contact_flags(s.contact)}});
  }
  open_out(path) << j.dump(2) << '\n';
}

void write_equilibrium_csv(const EquilibriumTable& table,
                           const std::string& path) {
  std::ofstream out = open_out(path);
  out << "omega0,Omega,theta0,xi,R0\n";
  for (const QuasiStaticState& qs : table.rows) {
    out << format_num(qs.drive_speed) << ',' << format_num(qs.revolve_rate)
        << ',' << format_num(qs.pendulum_phase) << ','
        << format_num(qs.axis_tilt) << ',' << format_num(qs.orbit_radius)
        << '\n';
  }
}

void write_eigen_csv(const StabilitySweep& sweep, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "omega0";
  for (int i = 1; i <= 6; ++i)
    out << ",re" << i << ",im" << i;
  out << '\n';
  for (const StabilityReport& rep : sweep.reports) {
    out << format_num(rep.drive_speed);
    for (int i = 0; i < 6; ++i)
      out << ',' << format_num(rep.eigenvalues(i).real()) << ','
          << format_num(rep.eigenvalues(i).imag());
    out << '\n';
  }
}

void write_control_log_csv(const std::vector<ControlLogRow>& rows,
                           const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,s_x,s_y,o_x,o_y,og_x,og_y,omega0_cmd,e\n";
  for (const ControlLogRow& r : rows) {
    out << format_num(r.t) << ',' << format_num(r.position.x()) << ','
        << format_num(r.position.y()) << ','
        << format_num(r.estimated_center.x()) << ','
        << format_num(r.estimated_center.y()) << ','
        << format_num(r.goal_center.x()) << ','
        << format_num(r.goal_center.y()) << ',' << format_num(r.command)
        << ',' << format_num(r.error) << '\n';
  }
}

std::vector<double> sweep_grid(const SweepConfig& sweep) {
  std::vector<double> grid;
  const int n = std::max(2, sweep.points);
  grid.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    grid.push_back(sweep.max_drive_speed * static_cast<double>(i) /
                   static_cast<double>(n - 1));
  return grid;
}

namespace {

EquilibriumTable build_table(const ScenarioConfig& cfg) {
  return sweep_equilibria(cfg.robot, sweep_grid(cfg.sweep));
}

SimOptions sim_options(const ScenarioConfig& cfg) {
  SimOptions opts;
  opts.strict_contact = cfg.strict_contact;
  opts.external_force = Vec3(cfg.disturbance.force[0], cfg.disturbance.force[1],
                             cfg.disturbance.force[2]);
  return opts;
}

int count_contact_violations(const Trajectory& traj) {
  int bad = 0;
  for (const TrajectorySample& s : traj.samples)
    if (!s.contact.normal_positive || !s.contact.within_friction_cone) ++bad;
  return bad;
}

// Plant + estimator + controller marching in lockstep; shared by the
// closed-loop scenarios. Time is tracked as an integer step count so repeated
// runs are bit-identical.
class ClosedLoopRun {
 public:
  ClosedLoopRun(const ScenarioConfig& cfg, const EquilibriumTable& table,
                ShellState state, unsigned long long noise_seed)
      : cfg_(cfg),
        table_(table),
        state_(std::move(state)),
        opts_(sim_options(cfg)),
        dt_(cfg.integrator.time_step),
        estimator_(cfg.controller.heading.blend,
                   cfg.controller.heading.min_speed),
        rng_(noise_seed),
        noise_(0.0, cfg.disturbance.pose_noise > 0.0
                        ? cfg.disturbance.pose_noise
                        : 1.0) {
    steps_per_tick_ =
        std::max<long>(1, std::lround(1.0 / (cfg.controller.rate_hz * dt_)));
    record_every_ =
        std::max<long>(1, std::lround(cfg.integrator.output_stride / dt_));
    reset_controller(state_.drive_speed);
    record_sample(DriveProfile::constant(state_.drive_speed));
  }

  double time() const { return static_cast<double>(steps_) * dt_; }
  const ShellState& state() const { return state_; }
  double tick() const { return static_cast<double>(steps_per_tick_) * dt_; }
  const std::optional<Pose>& pose() const { return last_pose_; }
  double command() const { return control_.command; }

  void reset_controller(double command) {
    control_ = ControllerState{};
    control_.gains = cfg_.controller.gains;
    control_.limits = cfg_.controller.limits;
    control_.command = command;
  }

  // one control period with the motor tracking target open-loop
  void open_loop_tick(double target, double rate) {
    sample_pose();
    advance(target, rate);
  }

  // One control period steering toward the task's orbit center. The feedback
  // only regulates the center, so after the PID step the command is trimmed
  // toward the task's nominal drive speed (whose natural radius is the
  // target); the trim shares the per-tick rate allowance with the PID.
  void control_tick(const WaypointTask& task) {
    sample_pose();
    double target = control_.command;
    if (last_pose_ && last_pose_->t > control_.last_pose_time) {
      const double previous = control_.command;
      const ControlOutput out =
          control_step(control_, *last_pose_, task, table_, tick());
      control_ = out.state;
      target = out.command;

      const double allowance = cfg_.controller.limits.max_command_rate * tick();
      const double used = target - previous;
      double trim = std::clamp(task.cross_drive_speed - target,
                               -cfg_.controller.nominal_trim_rate * tick(),
                               cfg_.controller.nominal_trim_rate * tick());
      trim = std::clamp(trim, -allowance - used, allowance - used);
      target += trim;
      control_.command = target;

      log.push_back({last_pose_->t, state_.center, out.estimated_center,
                     task.orbit_center, target, out.error});
    }
    advance(target, cfg_.controller.limits.max_command_rate);
  }

  Trajectory trajectory;
  std::vector<ControlLogRow> log;

 private:
  void sample_pose() {
    Vec3 pos = state_.center;
    if (cfg_.disturbance.pose_noise > 0.0) {
      pos.x() += noise_(rng_);
      pos.y() += noise_(rng_);
    }
    const double predicted =
        table_.revolve_rate_at(std::max(0.0, control_.command));
    const std::optional<Pose> p = estimator_.update(pos, time(), predicted);
    if (p) last_pose_ = p;
  }

  void advance(double target, double rate) {
    const double t0 = time();
    const double gap = target - state_.drive_speed;
    std::vector<DriveSegment> segs;
    if (gap != 0.0) {
      const double needed = std::abs(gap) / tick();
      segs.push_back({t0, target, std::min(std::max(needed, 1e-9), rate)});
    }
    const DriveProfile profile(t0, state_.drive_speed, std::move(segs));
    for (long i = 0; i < steps_per_tick_; ++i) {
      state_ = step(cfg_.robot, state_, profile, time(), dt_, opts_);
      ++steps_;
      if (steps_ % record_every_ == 0) record_sample(profile);
    }
  }

  void record_sample(const DriveProfile& profile) {
    trajectory.stride = static_cast<double>(record_every_) * dt_;
    trajectory.samples.push_back(
        {time(), state_,
         evaluate_contact(cfg_.robot, state_, profile, time(), opts_)});
  }

  const ScenarioConfig& cfg_;
  const EquilibriumTable& table_;
  ShellState state_;
  SimOptions opts_;
  double dt_;
  long steps_ = 0;
  long steps_per_tick_ = 1;
  long record_every_ = 1;
  HeadingEstimator estimator_;
  ControllerState control_;
  std::optional<Pose> last_pose_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> noise_;
};

}  // namespace

RunReport run_open_loop(const ScenarioConfig& cfg, const std::string& out_dir) {
  cfg.robot.validate();
  std::filesystem::create_directories(out_dir);
  RunReport report;
  report.scenario = "open-loop";

  auto run_point = [&](double w0, int index) {
    PointReport pt;
    pt.label = label_for("omega0", w0);
    try {
      const QuasiStaticState qs = solve_equilibrium(cfg.robot, w0);
      ShellState st = equilibrium_shell_state(cfg.robot, solve_equilibrium(cfg.robot, 0.0));
      st.center.head<2>().setZero();

      const double horizon = w0 > 0.0 ? cfg.open_loop.horizon
                                      : std::min(cfg.open_loop.horizon, 10.0);
      std::vector<DriveSegment> segs;
      if (w0 > 0.0) segs.push_back({0.0, w0, cfg.open_loop.ramp_rate});
      const DriveProfile profile(0.0, 0.0, std::move(segs));
      const Trajectory traj =
          simulate(cfg.robot, st, profile, horizon, cfg.integrator.time_step,
                   cfg.integrator.output_stride, sim_options(cfg));

      const std::string traj_name =
          "open_loop_" + std::to_string(index) + ".csv";
      write_trajectory_csv(traj, join_path(out_dir, traj_name));
      pt.artifacts.push_back(traj_name);

      const auto tail = tail_samples(traj, cfg.open_loop.tail_window);
      const double tilt = mean_axis_tilt(tail);
      pt.metrics.emplace_back("tilt_fit", tilt);
      pt.metrics.emplace_back("tilt_pred", qs.axis_tilt);
      pt.checks.push_back(make_check("tilt abs error",
                                     std::abs(tilt - qs.axis_tilt),
                                     cfg.open_loop.tilt_atol));
      pt.checks.push_back(make_check(
          "contact violations",
          static_cast<double>(count_contact_violations(traj)), 0.0));

      if (w0 > 0.0) {
        std::vector<Vec3> pts = tail_positions(traj, cfg.open_loop.tail_window);
        const CircleFit fit = fit_circle(pts);
        const double revolve = fitted_revolve_rate(tail, fit.center);
        pt.metrics.emplace_back("radius_fit", fit.radius);
        pt.metrics.emplace_back("radius_pred", qs.orbit_radius);
        pt.metrics.emplace_back("revolve_fit", revolve);
        pt.metrics.emplace_back("revolve_pred", qs.revolve_rate);
        pt.metrics.emplace_back("fit_residual", fit.residual);
        pt.checks.push_back(make_check(
            "radius rel error",
            std::abs(fit.radius - qs.orbit_radius) / qs.orbit_radius,
            cfg.open_loop.radius_rtol));
        pt.checks.push_back(make_check(
            "revolve rel error",
            std::abs(revolve - qs.revolve_rate) / std::abs(qs.revolve_rate),
            cfg.open_loop.revolve_rtol));
      }
    } catch (const std::exception& e) {
      pt.failure = e.what();
    }
    return pt;
  };

  std::vector<std::future<PointReport>> futures;
  for (std::size_t i = 0; i < cfg.open_loop.drive_speeds.size(); ++i)
    futures.push_back(std::async(std::launch::async, run_point,
                                 cfg.open_loop.drive_speeds[i],
                                 static_cast<int>(i)));
  for (auto& f : futures) report.points.push_back(f.get());

  // summary CSV comparing fits against the equilibrium family predictions
  std::ofstream summary = open_out(join_path(out_dir, "open_loop_summary.csv"));
  summary << "omega0,R0_pred,R0_fit,Omega_pred,Omega_fit,xi_pred,xi_fit\n";
  for (std::size_t i = 0; i < report.points.size(); ++i) {
    const PointReport& pt = report.points[i];
    auto metric = [&](const char* name) {
      for (const auto& [k, v] : pt.metrics)
        if (k == name) return v;
      return std::numeric_limits<double>::quiet_NaN();
    };
    summary << format_num(cfg.open_loop.drive_speeds[i]) << ','
            << format_num(metric("radius_pred")) << ','
            << format_num(metric("radius_fit")) << ','
            << format_num(metric("revolve_pred")) << ','
            << format_num(metric("revolve_fit")) << ','
            << format_num(metric("tilt_pred")) << ','
            << format_num(metric("tilt_fit")) << '\n';
  }

  finalize(report);
  return report;
}

RunReport run_circle(const ScenarioConfig& cfg, const std::string& out_dir) {
  cfg.robot.validate();
  std::filesystem::create_directories(out_dir);
  RunReport report;
  report.scenario = "circle";

  const EquilibriumTable table = build_table(cfg);

  auto run_point = [&](double goal_radius, int index) {
    PointReport pt;
    pt.label = label_for("Rg", goal_radius);
    try {
      const Vec3 setpoint(cfg.circle.setpoint[0], cfg.circle.setpoint[1], 0.0);
      const double w0 = std::max(table.drive_speed_for_radius(goal_radius),
                                 cfg.controller.limits.min_drive_speed);
      const QuasiStaticState qs = solve_equilibrium(cfg.robot, w0);
      ShellState st = equilibrium_shell_state(cfg.robot, qs);
      // place the shell start_offset away from the setpoint, orbiting a
      // displaced center so the controller has real work to do
      const Vec3 shift =
          setpoint + Vec3(cfg.circle.start_offset - qs.orbit_radius, 0.0, 0.0);
      st.center.x() += shift.x();
      st.center.y() += shift.y();

      WaypointTask task;
      task.goal = setpoint;
      task.orbit_center = setpoint;
      task.orbit_radius = goal_radius;
      task.cross_drive_speed = w0;

      ClosedLoopRun loop(cfg, table, st,
                         cfg.seed * 1000003ull +
                             static_cast<unsigned long long>(index));
      const long ticks =
          std::lround(cfg.circle.horizon / loop.tick());
      for (long k = 0; k < ticks; ++k) loop.control_tick(task);

      const std::string traj_name = "circle_" + std::to_string(index) + ".csv";
      const std::string log_name =
          "circle_" + std::to_string(index) + "_control.csv";
      write_trajectory_csv(loop.trajectory, join_path(out_dir, traj_name));
      write_control_log_csv(loop.log, join_path(out_dir, log_name));
      pt.artifacts.push_back(traj_name);
      pt.artifacts.push_back(log_name);

      // capture: estimated center stays within capture_radius of the goal
      double capture_time = std::numeric_limits<double>::infinity();
      {
        double window_start = -1.0;
        for (const ControlLogRow& row : loop.log) {
          const double d = (row.estimated_center - setpoint).head<2>().norm();
          if (d <= cfg.circle.capture_radius) {
            if (window_start < 0.0) window_start = row.t;
            if (row.t - window_start >= cfg.circle.capture_hold) {
              capture_time = window_start;
              break;
            }
          } else {
            window_start = -1.0;
          }
        }
      }
      const auto tail = tail_samples(loop.trajectory, cfg.circle.tail_window);
      const CircleFit fit =
          fit_circle(tail_positions(loop.trajectory, cfg.circle.tail_window));
      const double center_err = (fit.center - setpoint).head<2>().norm();
      const double radius_err =
          std::abs(fit.radius - goal_radius) / goal_radius;
      double approach_speed = 0.0;
      if (std::isfinite(capture_time) && capture_time > 0.0 && !loop.log.empty()) {
        const double d0 =
            (loop.log.front().estimated_center - setpoint).head<2>().norm();
        approach_speed = (d0 - cfg.circle.capture_radius) / capture_time;
      }

      pt.metrics.emplace_back("capture_time", capture_time);
      pt.metrics.emplace_back("radius_fit", fit.radius);
      pt.metrics.emplace_back("center_error", center_err);
      pt.metrics.emplace_back("approach_speed", approach_speed);
      pt.metrics.emplace_back("fit_residual", fit.residual);
      pt.metrics.emplace_back("mean_tilt", mean_axis_tilt(tail));

      pt.checks.push_back(
          make_check("capture time", capture_time, cfg.circle.horizon));
      pt.checks.push_back(
          make_check("radius rel error", radius_err, cfg.circle.radius_rtol));
      pt.checks.push_back(
          make_check("center abs error", center_err, cfg.circle.center_atol));
      pt.checks.push_back(make_check(
          "contact violations",
          static_cast<double>(count_contact_violations(loop.trajectory)), 0.0));
    } catch (const std::exception& e) {
      pt.failure = e.what();
    }
    return pt;
  };

  std::vector<std::future<PointReport>> futures;
  for (std::size_t i = 0; i < cfg.circle.radii.size(); ++i)
    futures.push_back(std::async(std::launch::async, run_point,
                                 cfg.circle.radii[i], static_cast<int>(i)));
  for (auto& f : futures) report.points.push_back(f.get());

  finalize(report);
  return report;
}

RunReport run_waypoints(const ScenarioConfig& cfg,
                        const std::vector<WaypointSpec>& course,
                        const std::string& out_dir) {
  cfg.robot.validate();
  std::filesystem::create_directories(out_dir);
  RunReport report;
  report.scenario = "waypoints";
  if (course.empty()) {
    report.pass = false;
    PointReport pt;
    pt.label = "course";
    pt.failure = "no waypoints given";
    report.points.push_back(pt);
    return report;
  }

  const EquilibriumTable table = build_table(cfg);
  const Vec3 start(cfg.waypoints.start[0], cfg.waypoints.start[1],
                   cfg.robot.shell_radius);

  ShellState st =
      equilibrium_shell_state(cfg.robot, solve_equilibrium(cfg.robot, 0.0));
  st.center.x() = start.x();
  st.center.y() = start.y();

  ClosedLoopRun loop(cfg, table, st, cfg.seed * 1000003ull + 77ull);
  Vec3 approach_from = start;

  for (std::size_t i = 0; i < course.size(); ++i) {
    const WaypointSpec& wp = course[i];
    PointReport pt;
    pt.label = label_for("waypoint", static_cast<double>(i));
    const Vec3 goal(wp.x, wp.y, 0.0);
    try {
      std::optional<Vec3> crossing;
      if (wp.speed) {
        Vec3 dir = goal - approach_from;
        dir.z() = 0.0;
        if (dir.norm() < 1e-9)
          throw DegenerateInput("waypoint coincides with the approach point");
        crossing = *wp.speed * dir.normalized();
      }
      const WaypointTask task = plan_waypoint(
          goal, crossing, table, cfg.controller.limits,
          cfg.controller.stop.default_radius, approach_from);

      // spin up open-loop until the motor reaches the leg's cruise speed and
      // the heading estimator has locked onto the motion
      const double cruise = std::max(task.cross_drive_speed,
                                     cfg.controller.limits.min_drive_speed);
      loop.reset_controller(cruise);
      const double spin_up_deadline = loop.time() + 30.0;
      while ((loop.state().drive_speed < cruise - 1e-9 || !loop.pose()) &&
             loop.time() < spin_up_deadline)
        loop.open_loop_tick(cruise, cfg.waypoints.spin_up_rate);

      // steer onto the goal orbit, then wait for the stop trigger; the
      // trigger only arms once the measured orbit radius sits inside the
      // capture band
      const double deadline = loop.time() + cfg.waypoints.leg_timeout;
      bool triggered = false;
      double closest = std::numeric_limits<double>::infinity();
      while (loop.time() < deadline) {
        loop.control_tick(task);
        closest = std::min(closest,
                           (loop.state().center - goal).head<2>().norm());
        if (!loop.pose()) continue;
        const double orbit_err = std::abs(
            (loop.pose()->position - task.orbit_center).head<2>().norm() -
            task.orbit_radius);
        if (orbit_err > cfg.controller.stop.capture_tolerance) continue;
        const double revolve = table.revolve_rate_at(loop.command());
        const double lead = task.stop ? cfg.controller.stop.lead_time
                                      : 2.0 * loop.tick();
        if (stop_trigger(*loop.pose(), task, revolve, lead)) {
          triggered = true;
          break;
        }
      }
      if (triggered && !task.stop) {
        // carry the crossing past the vertex before turning to the next leg
        for (int k = 0; k < 3; ++k) {
          loop.control_tick(task);
          closest = std::min(closest,
                             (loop.state().center - goal).head<2>().norm());
        }
      }

      if (!triggered) {
        pt.failure = "leg timed out before reaching the goal azimuth";
        pt.metrics.emplace_back("closest_approach", closest);
      } else if (task.stop) {
        const long settle_ticks =
            std::lround(cfg.controller.stop.settle_time / loop.tick());
        for (long k = 0; k < settle_ticks; ++k)
          loop.open_loop_tick(0.0, cfg.controller.stop.ramp_rate);
        const double stop_distance =
            (loop.state().center - goal).head<2>().norm();
        pt.metrics.emplace_back("stop_distance", stop_distance);
        pt.metrics.emplace_back("residual_spin",
                                loop.state().angular_velocity.norm());
        pt.checks.push_back(make_check("stop distance", stop_distance,
                                       cfg.waypoints.stop_tolerance));
      } else {
        pt.metrics.emplace_back("crossing_miss", closest);
        pt.checks.push_back(make_check("crossing miss", closest,
                                       cfg.waypoints.stop_tolerance));
      }
    } catch (const std::exception& e) {
      pt.failure = e.what();
    }
    report.points.push_back(pt);
    approach_from = Vec3(wp.x, wp.y, 0.0);
    if (!report.points.back().failure.empty()) break;
  }

  const std::string traj_name = "waypoints.csv";
  const std::string log_name = "waypoints_control.csv";
  write_trajectory_csv(loop.trajectory, join_path(out_dir, traj_name));
  write_control_log_csv(loop.log, join_path(out_dir, log_name));
  for (PointReport& pt : report.points) {
    pt.artifacts.push_back(traj_name);
    pt.artifacts.push_back(log_name);
  }

  finalize(report);
  return report;
}

}  // namespace rollbot
