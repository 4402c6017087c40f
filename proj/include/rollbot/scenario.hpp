#pragma once

// Scenario runners reproducing the experiment suite in simulation, plus the
// CSV/JSON artifact writers. Each runner returns a RunReport whose checks
// carry their tolerance from the config; a report passes only if every check
// of every point passes.

#include <string>
#include <utility>
#include <vector>

#include "rollbot/config.hpp"
#include "rollbot/integrator.hpp"
#include "rollbot/stability.hpp"

namespace rollbot {

struct CheckResult {
  std::string name;
  double value = 0.0;
  double bound = 0.0;  // |value| must stay at or below this
  bool pass = false;
};

struct PointReport {
  std::string label;
  std::vector<std::pair<std::string, double>> metrics;
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;
  std::string failure;  // nonempty when the point aborted
  bool pass = true;
};

struct RunReport {
  std::string scenario;
  std::vector<PointReport> points;
  bool pass = true;
};

std::string serialize_report(const RunReport& report);
void save_report(const RunReport& report, const std::string& path);

// Uniform drive-speed grid implied by a sweep config (first point is zero).
std::vector<double> sweep_grid(const SweepConfig& sweep);

// Steady-state readouts from a trajectory tail.
double fitted_revolve_rate(std::span<const TrajectorySample> tail,
                           const Vec3& center);
double mean_axis_tilt(std::span<const TrajectorySample> tail);
std::vector<Vec3> tail_positions(const Trajectory& traj, double window);
std::span<const TrajectorySample> tail_samples(const Trajectory& traj,
                                               double window);

// Artifact writers; numbers are emitted with full round-trip precision so
// reruns produce byte-identical files.
void write_trajectory_csv(const Trajectory& traj, const std::string& path);
void write_trajectory_json(const Trajectory& traj, const std::string& path);
void write_equilibrium_csv(const EquilibriumTable& table,
                           const std::string& path);
void write_eigen_csv(const StabilitySweep& sweep, const std::string& path);

struct ControlLogRow {
  double t = 0.0;
  Vec3 position = Vec3::Zero();
  Vec3 estimated_center = Vec3::Zero();
  Vec3 goal_center = Vec3::Zero();
  double command = 0.0;
  double error = 0.0;
};
void write_control_log_csv(const std::vector<ControlLogRow>& rows,
                           const std::string& path);

// Experiment reproductions.
RunReport run_open_loop(const ScenarioConfig& cfg, const std::string& out_dir);
RunReport run_circle(const ScenarioConfig& cfg, const std::string& out_dir);
RunReport run_waypoints(const ScenarioConfig& cfg,
                        const std::vector<WaypointSpec>& course,
                        const std::string& out_dir);

}  // namespace rollbot
