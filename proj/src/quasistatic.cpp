#include "rollbot/quasistatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "rollbot/errors.hpp"

namespace rollbot {

Vec3 equilibrium_residual(const RobotParams& p, double drive_speed,
                          const Vec3& unknowns) {
  const double revolve = unknowns(0);
  const double phase = unknowns(1);
  const double tilt = unknowns(2);
  if (std::abs(revolve) < 1e-12)
    throw InvalidState("revolve rate must be nonzero in the circular ansatz");

  const Mat3 T0 = rotation_y(tilt);
  const Vec3 spin_axis = T0.col(2);  // tilted body z in the ground frame
  const Vec3 w = revolve * Vec3::UnitZ() - drive_speed * spin_axis;
  // on the steady orbit the whole velocity field revolves rigidly
  const Vec3 wdot = revolve * Vec3::UnitZ().cross(w);

  const MassKinematics mk = pendulum_kinematics(p, phase, drive_speed, 0.0);
  const MassKinematics masses[] = {mk};
  const Mat3 L = inertia_about_contact(p, T0, masses);
  const Vec3 rhs =
      contact_torque(p, w, T0, masses, Vec3::Zero(), -p.damping * w);
  return (L * wdot - rhs) / (p.total_mass() * p.gravity * p.shell_radius);
}

namespace {

struct NewtonResult {
  Vec3 x;
  double norm;
  bool ok;
};

NewtonResult newton_solve(const RobotParams& p, double drive_speed, Vec3 x) {
  auto f = [&](const Vec3& v) { return equilibrium_residual(p, drive_speed, v); };
  Vec3 r = f(x);
  double nr = r.norm();
  for (int iter = 0; iter < 100 && nr > 1e-13; ++iter) {
    Mat3 J;
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(j)));
      Vec3 xp = x;
      xp(j) += h;
      J.col(j) = (f(xp) - r) / h;
    }
    Eigen::FullPivLU<Mat3> lu(J);
    if (!lu.isInvertible()) return {x, nr, false};
    const Vec3 dx = lu.solve(r);
    bool improved = false;
    for (double lambda = 1.0; lambda > 1e-4; lambda *= 0.5) {
      const Vec3 xn = x - lambda * dx;
      Vec3 rn;
      try {
        rn = f(xn);
      } catch (const InvalidState&) {
        continue;  // stepped across the zero-revolve-rate wall
      }
      if (rn.norm() < nr) {
        x = xn;
        r = rn;
        nr = rn.norm();
        improved = true;
        break;
      }
    }
    if (!improved) break;
  }
  return {x, nr, nr < 1e-10};
}

QuasiStaticState make_state(const RobotParams& p, double drive_speed,
                            const Vec3& x, double norm, Branch branch) {
  QuasiStaticState qs;
  qs.drive_speed = drive_speed;
  qs.revolve_rate = x(0);
  qs.pendulum_phase = wrap_angle(x(1));
  qs.axis_tilt = x(2);
  qs.orbit_radius = drive_speed * p.shell_radius * std::sin(x(2)) / x(0);
  qs.residual_norm = norm;
  qs.branch = branch;
  return qs;
}

QuasiStaticState static_limit(const RobotParams& p) {
  QuasiStaticState qs;
  qs.axis_tilt = p.cone_angle;
  qs.orbit_radius = p.shell_radius * std::tan(p.cone_angle);
  return qs;
}

}  // namespace

QuasiStaticState solve_equilibrium(const RobotParams& p, double drive_speed,
                                   std::optional<Vec3> guess, Branch branch) {
  p.validate();
  if (drive_speed < 0.0)
    throw OutOfRange("drive speed must be non-negative");
  if (drive_speed == 0.0) {
    if (branch != Branch::Normal)
      throw WrongBranch("only the normal branch reaches zero drive speed");
    return static_limit(p);
  }

  Vec3 x;
  if (guess) {
    x = *guess;
  } else if (branch == Branch::FastRevolving) {
    x = Vec3(2.0 * drive_speed, M_PI, p.cone_angle);
  } else {
    // continue the family up from the static limit
    const double step = 0.05 * M_PI;
    x = Vec3(0.0, 0.0, p.cone_angle);
    double w = 0.0;
    while (w < drive_speed) {
      w = std::min(w + step, drive_speed);
      Vec3 seed = x;
      if (seed(0) == 0.0) seed(0) = w * std::cos(p.cone_angle);
      const NewtonResult res = newton_solve(p, w, seed);
      if (!res.ok)
        throw NoConvergence("equilibrium continuation stalled at drive speed " +
                            std::to_string(w));
      x = res.x;
    }
    const double phase = wrap_angle(x(1));
    if (std::abs(phase) > M_PI / 2.0)
      throw WrongBranch("continuation left the normal branch");
    return make_state(p, drive_speed, x, equilibrium_residual(p, drive_speed, x).norm(),
                      Branch::Normal);
  }

  const NewtonResult res = newton_solve(p, drive_speed, x);
  if (!res.ok)
    throw NoConvergence("equilibrium solve did not converge at drive speed " +
                        std::to_string(drive_speed));
  const double phase = wrap_angle(res.x(1));
  const bool near_pi = std::abs(phase) > M_PI / 2.0;
  if (branch == Branch::Normal && near_pi)
    throw WrongBranch("solution has pendulum phase near pi; request the fast branch");
  if (branch == Branch::FastRevolving && !near_pi)
    throw WrongBranch("solution has pendulum phase near zero; request the normal branch");
  return make_state(p, drive_speed, res.x, res.norm, branch);
}

EquilibriumTable sweep_equilibria(const RobotParams& p,
                                  std::span<const double> drive_speeds) {
  p.validate();
  EquilibriumTable tab;
  double prev = -1.0;
  std::optional<Vec3> carry;
  for (const double w0 : drive_speeds) {
    if (w0 < 0.0 || w0 <= prev)
      throw OutOfRange("drive-speed grid must be ascending and non-negative");
    prev = w0;
    try {
      QuasiStaticState qs;
      if (w0 > 0.0 && carry) {
        try {
          qs = solve_equilibrium(p, w0, carry);
        } catch (const Error&) {
          qs = solve_equilibrium(p, w0);  // fall back to full continuation
        }
      } else {
        qs = solve_equilibrium(p, w0);
      }
      tab.rows.push_back(qs);
      if (w0 > 0.0)
        carry = Vec3(qs.revolve_rate, qs.pendulum_phase, qs.axis_tilt);
    } catch (const Error& e) {
      tab.failures.emplace_back(w0, e.what());
    }
  }
  return tab;
}

namespace {

// cubic Hermite through (xs, ys) with centered-difference node slopes;
// queries are clamped to the tabulated range
double hermite(const std::vector<double>& xs, const std::vector<double>& ys,
               double x, bool derivative) {
  if (xs.size() < 2) throw InvalidState("interpolation needs at least two rows");
  x = std::clamp(x, xs.front(), xs.back());
  auto hi = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t i = (hi == xs.begin()) ? 0 : (hi - xs.begin() - 1);
  if (i + 1 >= xs.size()) i = xs.size() - 2;

  auto slope = [&](std::size_t k) {
    if (k == 0) return (ys[1] - ys[0]) / (xs[1] - xs[0]);
    if (k + 1 == xs.size())
      return (ys[k] - ys[k - 1]) / (xs[k] - xs[k - 1]);
    return (ys[k + 1] - ys[k - 1]) / (xs[k + 1] - xs[k - 1]);
  };
  const double h = xs[i + 1] - xs[i];
  const double t = (x - xs[i]) / h;
  const double m0 = slope(i);
  const double m1 = slope(i + 1);
  const double t2 = t * t;
  const double t3 = t2 * t;
  if (!derivative) {
    return (2.0 * t3 - 3.0 * t2 + 1.0) * ys[i] + (t3 - 2.0 * t2 + t) * h * m0 +
           (-2.0 * t3 + 3.0 * t2) * ys[i + 1] + (t3 - t2) * h * m1;
  }
  return ((6.0 * t2 - 6.0 * t) * ys[i] + (3.0 * t2 - 4.0 * t + 1.0) * h * m0 +
          (-6.0 * t2 + 6.0 * t) * ys[i + 1] + (3.0 * t2 - 2.0 * t) * h * m1) /
         h;
}

template <class Get>
std::vector<double> column(const std::vector<QuasiStaticState>& rows, Get get) {
  std::vector<double> out;
  out.reserve(rows.size());
  for (const QuasiStaticState& qs : rows) out.push_back(get(qs));
  return out;
}

double invert_monotone(const std::vector<double>& xs,
                       const std::vector<double>& ys, double target) {
  double lo = xs.front();
  double hi = xs.back();
  const double y_lo = hermite(xs, ys, lo, false);
  const double y_hi = hermite(xs, ys, hi, false);
  const bool increasing = y_hi >= y_lo;
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double y = hermite(xs, ys, mid, false);
    if ((y < target) == increasing)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

double EquilibriumTable::min_drive_speed() const {
  if (rows.empty()) throw InvalidState("equilibrium table is empty");
  return rows.front().drive_speed;
}

double EquilibriumTable::max_drive_speed() const {
  if (rows.empty()) throw InvalidState("equilibrium table is empty");
  return rows.back().drive_speed;
}

double EquilibriumTable::orbit_radius_at(double drive_speed) const {
  return hermite(column(rows, [](auto& q) { return q.drive_speed; }),
                 column(rows, [](auto& q) { return q.orbit_radius; }),
                 drive_speed, false);
}

double EquilibriumTable::revolve_rate_at(double drive_speed) const {
  return hermite(column(rows, [](auto& q) { return q.drive_speed; }),
                 column(rows, [](auto& q) { return q.revolve_rate; }),
                 drive_speed, false);
}

double EquilibriumTable::axis_tilt_at(double drive_speed) const {
  return hermite(column(rows, [](auto& q) { return q.drive_speed; }),
                 column(rows, [](auto& q) { return q.axis_tilt; }),
                 drive_speed, false);
}

double EquilibriumTable::pendulum_phase_at(double drive_speed) const {
  return hermite(column(rows, [](auto& q) { return q.drive_speed; }),
                 column(rows, [](auto& q) { return q.pendulum_phase; }),
                 drive_speed, false);
}

double EquilibriumTable::radius_slope(double drive_speed) const {
  if (rows.empty() || drive_speed < rows.front().drive_speed - 1e-12 ||
      drive_speed > rows.back().drive_speed + 1e-12)
    throw OutOfRange("drive speed outside the tabulated range");
  return hermite(column(rows, [](auto& q) { return q.drive_speed; }),
                 column(rows, [](auto& q) { return q.orbit_radius; }),
                 drive_speed, true);
}

double EquilibriumTable::travel_speed_at(double drive_speed) const {
  return hermite(column(rows, [](auto& q) { return q.drive_speed; }),
                 column(rows, [](auto& q) { return q.revolve_rate * q.orbit_radius; }),
                 drive_speed, false);
}

double EquilibriumTable::drive_speed_for_radius(double orbit_radius) const {
  const auto xs = column(rows, [](auto& q) { return q.drive_speed; });
  const auto ys = column(rows, [](auto& q) { return q.orbit_radius; });
  // requests beyond the achievable band saturate at the nearest end
  const double lo = std::min(ys.front(), ys.back());
  const double hi = std::max(ys.front(), ys.back());
  return invert_monotone(xs, ys, std::clamp(orbit_radius, lo, hi));
}

double EquilibriumTable::drive_speed_for_travel(double ground_speed) const {
  const auto xs = column(rows, [](auto& q) { return q.drive_speed; });
  const auto ys =
      column(rows, [](auto& q) { return q.revolve_rate * q.orbit_radius; });
  const double lo = std::min(ys.front(), ys.back());
  const double hi = std::max(ys.front(), ys.back());
  if (ground_speed < lo - 1e-9 || ground_speed > hi + 1e-9)
    throw InfeasibleSpeed("ground speed outside the tabulated range");
  return invert_monotone(xs, ys, std::clamp(ground_speed, lo, hi));
}

ShellState equilibrium_shell_state(const RobotParams& p,
                                   const QuasiStaticState& qs) {
  ShellState st;
  st.orientation = rotation_y(qs.axis_tilt);
  st.angular_velocity = qs.revolve_rate * Vec3::UnitZ() -
                        qs.drive_speed * st.orientation.col(2);
  st.center = Vec3(qs.orbit_radius, 0.0, p.shell_radius);
  st.pendulum_angle = qs.pendulum_phase;
  st.drive_speed = qs.drive_speed;
  return st;
}

}  // namespace rollbot
