// Command-line front end: equilibrium and stability sweeps, the three
// simulated experiments, and a numeric CSV comparison utility. Every verb
// writes its artifacts under --out-dir and exits nonzero if any enabled
// check fails.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rollbot/config.hpp"
#include "rollbot/errors.hpp"
#include "rollbot/quasistatic.hpp"
#include "rollbot/scenario.hpp"
#include "rollbot/stability.hpp"

namespace {

using namespace rollbot;

struct GlobalOpts {
  std::string config_path;
  std::string out_dir = "out";
  long long seed = -1;  // <0 keeps the config value
  bool strict_contact = false;
};

ScenarioConfig load_scenario(const GlobalOpts& g) {
  ScenarioConfig cfg;
  if (!g.config_path.empty()) {
    std::vector<std::string> warnings;
    cfg = load_config(g.config_path, &warnings);
    for (const std::string& w : warnings) std::cerr << "warning: " << w << '\n';
  }
  if (g.seed >= 0) cfg.seed = static_cast<unsigned long long>(g.seed);
  if (g.strict_contact) cfg.strict_contact = true;
  return cfg;
}

std::string out_path(const GlobalOpts& g, const std::string& name) {
  std::filesystem::create_directories(g.out_dir);
  return (std::filesystem::path(g.out_dir) / name).string();
}

void print_report(const RunReport& report) {
  for (const PointReport& pt : report.points) {
    if (!pt.failure.empty()) {
      std::printf("FAIL  %s: %s\n", pt.label.c_str(), pt.failure.c_str());
      continue;
    }
    std::printf("%s  %s\n", pt.pass ? "PASS" : "FAIL", pt.label.c_str());
    for (const CheckResult& c : pt.checks)
      std::printf("  %s  %s = %.6g (allowed %.6g)\n", c.pass ? "ok  " : "FAIL",
                  c.name.c_str(), c.value, c.bound);
  }
  std::printf("%s: %s\n", report.scenario.c_str(),
              report.pass ? "all checks passed" : "CHECKS FAILED");
}

int finish(const GlobalOpts& g, const RunReport& report,
           const std::string& report_name) {
  save_report(report, out_path(g, report_name));
  print_report(report);
  return report.pass ? 0 : 1;
}

int cmd_quasistatic_sweep(const GlobalOpts& g) {
  const ScenarioConfig cfg = load_scenario(g);
  const EquilibriumTable table =
      sweep_equilibria(cfg.robot, sweep_grid(cfg.sweep));
  write_equilibrium_csv(table, out_path(g, "equilibria.csv"));
  std::printf("solved %zu equilibria, %zu failures -> %s\n", table.rows.size(),
              table.failures.size(), out_path(g, "equilibria.csv").c_str());
  for (const auto& [w0, what] : table.failures)
    std::printf("FAIL  omega0=%.6g: %s\n", w0, what.c_str());
  if (!table.rows.empty())
    std::printf("orbit radius spans %.6g m to %.6g m\n",
                table.rows.front().orbit_radius,
                table.rows.back().orbit_radius);
  return table.failures.empty() ? 0 : 1;
}

int cmd_stability_sweep(const GlobalOpts& g) {
  const ScenarioConfig cfg = load_scenario(g);
  const EquilibriumTable table =
      sweep_equilibria(cfg.robot, sweep_grid(cfg.sweep));
  for (const auto& [w0, what] : table.failures)
    std::printf("FAIL  omega0=%.6g: equilibrium: %s\n", w0, what.c_str());
  const StabilitySweep sweep = stability_sweep(cfg.robot, table);
  write_eigen_csv(sweep, out_path(g, "eigen_locus.csv"));
  std::size_t unstable = 0;
  for (const StabilityReport& rep : sweep.reports) {
    if (!rep.stable) {
      ++unstable;
      std::printf("FAIL  omega0=%.6g: unstable mode present\n",
                  rep.drive_speed);
    }
  }
  for (const auto& [w0, what] : sweep.failures)
    std::printf("FAIL  omega0=%.6g: %s\n", w0, what.c_str());
  std::printf("analyzed %zu points (%zu unstable, %zu failed) -> %s\n",
              sweep.reports.size(), unstable, sweep.failures.size(),
              out_path(g, "eigen_locus.csv").c_str());
  if (!sweep.reports.empty()) {
    const StabilityReport& mid = sweep.reports[sweep.reports.size() / 2];
    std::printf("recovery time at omega0=%.6g: %.6g s\n", mid.drive_speed,
                mid.recovery_time);
  }
  const bool ok =
      table.failures.empty() && sweep.failures.empty() && unstable == 0;
  return ok ? 0 : 1;
}

int cmd_sim_open_loop(const GlobalOpts& g) {
  const ScenarioConfig cfg = load_scenario(g);
  return finish(g, run_open_loop(cfg, g.out_dir), "open_loop_report.json");
}

int cmd_sim_circle(const GlobalOpts& g) {
  const ScenarioConfig cfg = load_scenario(g);
  return finish(g, run_circle(cfg, g.out_dir), "circle_report.json");
}

int cmd_sim_waypoints(const GlobalOpts& g, const std::string& course_path) {
  const ScenarioConfig cfg = load_scenario(g);
  std::vector<WaypointSpec> course = cfg.waypoints.points;
  if (!course_path.empty()) course = load_waypoints(course_path);
  if (course.empty()) course = default_waypoints();
  return finish(g, run_waypoints(cfg, course, g.out_dir),
                "waypoints_report.json");
}

// --- report compare -------------------------------------------------------

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read file: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
  }
  return rows;
}

bool numeric(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

int cmd_report_compare(const std::string& path_a, const std::string& path_b,
                       double rtol, double atol) {
  const auto a = read_csv(path_a);
  const auto b = read_csv(path_b);
  std::size_t mismatches = 0;
  auto complain = [&](std::size_t line, std::size_t col,
                      const std::string& what) {
    if (++mismatches <= 20)
      std::printf("line %zu, column %zu: %s\n", line + 1, col + 1,
                  what.c_str());
  };
  if (a.size() != b.size())
    std::printf("row count differs: %zu vs %zu\n", a.size(), b.size());
  const std::size_t nrows = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < nrows; ++i) {
    if (a[i].size() != b[i].size()) {
      complain(i, 0, "column count differs (" + std::to_string(a[i].size()) +
                         " vs " + std::to_string(b[i].size()) + ")");
      continue;
    }
    for (std::size_t j = 0; j < a[i].size(); ++j) {
      double va = 0.0, vb = 0.0;
      const bool na = numeric(a[i][j], va);
      const bool nb = numeric(b[i][j], vb);
      if (na && nb) {
        const double tol = atol + rtol * std::abs(vb);
        if (!(std::abs(va - vb) <= tol) && !(std::isnan(va) && std::isnan(vb)))
          complain(i, j,
                   a[i][j] + " vs " + b[i][j] + " (tolerance " +
                       std::to_string(tol) + ")");
      } else if (a[i][j] != b[i][j]) {
        complain(i, j, "'" + a[i][j] + "' vs '" + b[i][j] + "'");
      }
    }
  }
  if (a.size() != b.size()) ++mismatches;
  if (mismatches > 20)
    std::printf("... %zu mismatches in total\n", mismatches);
  std::printf("compare: %s\n", mismatches == 0 ? "files agree" : "FILES DIFFER");
  return mismatches == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pendulum-driven spherical robot: simulation and control"};
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config_path, "scenario config JSON");
  app.add_option("--out-dir", g.out_dir, "directory for artifacts");
  app.add_option("--seed", g.seed, "override the disturbance seed");
  app.add_flag("--strict-contact", g.strict_contact,
               "abort simulation when the contact model is violated");

  auto* quasistatic = app.add_subcommand("quasistatic", "equilibrium family");
  auto* qs_sweep =
      quasistatic->add_subcommand("sweep", "solve the family over the grid");
  quasistatic->require_subcommand(1);

  auto* stability = app.add_subcommand("stability", "linear stability");
  auto* st_sweep = stability->add_subcommand(
      "sweep", "eigenvalues along the equilibrium family");
  stability->require_subcommand(1);

  auto* sim = app.add_subcommand("sim", "time-domain experiments");
  auto* sim_open = sim->add_subcommand(
      "open-loop", "constant-drive runs compared against the family");
  auto* sim_circle =
      sim->add_subcommand("circle", "closed-loop circle tracking");
  auto* sim_way =
      sim->add_subcommand("waypoints", "closed-loop waypoint course");
  std::string course_path;
  sim_way->add_option("--course", course_path, "waypoint list JSON");
  sim->require_subcommand(1);

  auto* report = app.add_subcommand("report", "artifact utilities");
  auto* compare =
      report->add_subcommand("compare", "numeric CSV comparison");
  std::string file_a, file_b;
  double rtol = 1e-9, atol = 0.0;
  compare->add_option("a", file_a, "first CSV")->required();
  compare->add_option("b", file_b, "second CSV")->required();
  compare->add_option("--rtol", rtol, "relative tolerance");
  compare->add_option("--atol", atol, "absolute tolerance");
  report->require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    if (qs_sweep->parsed()) return cmd_quasistatic_sweep(g);
    if (st_sweep->parsed()) return cmd_stability_sweep(g);
    if (sim_open->parsed()) return cmd_sim_open_loop(g);
    if (sim_circle->parsed()) return cmd_sim_circle(g);
    if (sim_way->parsed()) return cmd_sim_waypoints(g, course_path);
    if (compare->parsed())
      return cmd_report_compare(file_a, file_b, rtol, atol);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  std::cerr << "no command given\n";
  return 2;
}
