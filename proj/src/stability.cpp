#include "rollbot/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "rollbot/errors.hpp"

namespace rollbot {

Vec6 reduced_dynamics(const RobotParams& p, const QuasiStaticState& qs,
                      const Vec6& x) {
  const Vec3 alpha = x.head<3>();
  const Vec3 w = x.tail<3>();
  const Mat3 T0 = rotation_y(qs.axis_tilt);
  const Mat3 G = so3_exp(alpha) * T0;

  // chart velocity: the equilibrium revolves at the orbit rate while the
  // body spins about its own tilted axis at the drive speed
  const Vec3 v = w - qs.revolve_rate * Vec3::UnitZ() + qs.drive_speed * G.col(2);
  const Vec3 alpha_dot = so3_left_jacobian_inverse(alpha) * v;

  const MassKinematics mk =
      pendulum_kinematics(p, qs.pendulum_phase, qs.drive_speed, 0.0);
  const MassKinematics masses[] = {mk};
  ShellState st;
  st.orientation = G;
  st.angular_velocity = w;
  const Vec3 w_dot =
      angular_acceleration(p, st, masses, Vec3::Zero(), -p.damping * w) -
      qs.revolve_rate * Vec3::UnitZ().cross(w);

  Vec6 out;
  out << alpha_dot, w_dot;
  return out;
}

Mat6 linearize(const RobotParams& p, const QuasiStaticState& qs,
               double fd_step) {
  if (!(fd_step > 0.0)) throw OutOfRange("finite-difference step must be positive");
  if (qs.branch != Branch::Normal)
    throw InvalidState("linearization is defined on the normal branch");
  if (qs.drive_speed > 0.0) {
    const Vec3 unknowns(qs.revolve_rate, qs.pendulum_phase, qs.axis_tilt);
    if (equilibrium_residual(p, qs.drive_speed, unknowns).norm() > 1e-8)
      throw InvalidState("state is not an equilibrium; solve it first");
  }

  Vec6 x0 = Vec6::Zero();
  x0.tail<3>() = qs.revolve_rate * Vec3::UnitZ() -
                 qs.drive_speed * rotation_y(qs.axis_tilt).col(2);

  Mat6 J;
  for (int j = 0; j < 6; ++j) {
    Vec6 xp = x0;
    Vec6 xm = x0;
    xp(j) += fd_step;
    xm(j) -= fd_step;
    J.col(j) = (reduced_dynamics(p, qs, xp) - reduced_dynamics(p, qs, xm)) /
               (2.0 * fd_step);
  }

  // similarity transform with the chart-coupling block zeroes the top row of
  // blocks exactly, leaving a companion matrix with the same spectrum
  const Mat3 K = J.topLeftCorner<3, 3>();
  const Mat3 A = J.bottomLeftCorner<3, 3>();
  const Mat3 B = J.bottomRightCorner<3, 3>();
  Mat6 companion = Mat6::Zero();
  companion.topRightCorner<3, 3>() = Mat3::Identity();
  companion.bottomLeftCorner<3, 3>() = A - B * K;
  companion.bottomRightCorner<3, 3>() = B + K;
  return companion;
}

namespace {

std::array<int, 6> sorted_order(const Vec6c& values) {
  std::array<int, 6> idx;
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    if (values(a).real() != values(b).real())
      return values(a).real() > values(b).real();
    return values(a).imag() > values(b).imag();
  });
  return idx;
}

}  // namespace

Vec6c spectrum(const Mat6& system) {
  Eigen::EigenSolver<Mat6> solver(system);
  if (solver.info() != Eigen::Success)
    throw NoConvergence("eigenvalue iteration did not converge");
  const Vec6c raw = solver.eigenvalues();
  const auto order = sorted_order(raw);
  Vec6c out;
  for (int i = 0; i < 6; ++i) out(i) = raw(order[i]);
  return out;
}

RecoveryInfo recovery(const Vec6c& eigenvalues) {
  RecoveryInfo info;
  int trivial = 0;
  for (int i = 1; i < 6; ++i) {
    if (std::abs(eigenvalues(i).real()) <
        std::abs(eigenvalues(trivial).real()))
      trivial = i;
  }
  std::vector<int> near_zero;
  for (int i = 0; i < 6; ++i)
    if (std::abs(eigenvalues(i).real()) < 1e-6) near_zero.push_back(i);
  if (near_zero.size() > 1) {
    std::ostringstream msg;
    msg << "symmetry mode is ambiguous; eigenvalues with near-zero real part:";
    for (const int i : near_zero)
      msg << " (" << eigenvalues(i).real() << (eigenvalues(i).imag() < 0 ? "" : "+")
          << eigenvalues(i).imag() << "i)";
    throw DegenerateInput(msg.str());
  }

  info.trivial_index = trivial;
  double slowest = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) {
    if (i == trivial) continue;
    slowest = std::max(slowest, eigenvalues(i).real());
  }
  info.slowest_real = slowest;
  info.stable = slowest < 0.0;
  info.recovery_time =
      slowest == 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / slowest;
  return info;
}

StabilityReport analyze_stability(const RobotParams& p,
                                  const QuasiStaticState& qs, double fd_step) {
  const Mat6 companion = linearize(p, qs, fd_step);
  Eigen::EigenSolver<Mat6> solver(companion);
  if (solver.info() != Eigen::Success)
    throw NoConvergence("eigenvalue iteration did not converge");
  const Vec6c raw = solver.eigenvalues();
  const auto order = sorted_order(raw);

  StabilityReport rep;
  rep.drive_speed = qs.drive_speed;
  for (int i = 0; i < 6; ++i) rep.eigenvalues(i) = raw(order[i]);

  const RecoveryInfo info = recovery(rep.eigenvalues);
  rep.trivial_index = info.trivial_index;
  rep.recovery_time = info.recovery_time;
  rep.stable = info.stable;

  // in companion coordinates the symmetry generator is a pure z chart
  // rotation; report how well the identified eigenvector matches it
  const auto vectors = solver.eigenvectors();
  const auto v = vectors.col(order[static_cast<std::size_t>(rep.trivial_index)]);
  rep.trivial_alignment = std::abs(v(2)) / v.norm();
  return rep;
}

StabilitySweep stability_sweep(const RobotParams& p,
                               const EquilibriumTable& table) {
  StabilitySweep sweep;
  for (const QuasiStaticState& qs : table.rows) {
    try {
      sweep.reports.push_back(analyze_stability(p, qs));
    } catch (const Error& e) {
      sweep.failures.emplace_back(qs.drive_speed, e.what());
    }
  }
  return sweep;
}

}  // namespace rollbot
