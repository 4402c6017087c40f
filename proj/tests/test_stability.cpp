#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "rollbot/errors.hpp"
#include "rollbot/stability.hpp"

using namespace rollbot;

namespace {

RobotParams params() { return RobotParams{}; }

std::vector<double> grid(double max_speed, int points) {
  std::vector<double> g;
  for (int i = 0; i < points; ++i)
    g.push_back(max_speed * i / double(points - 1));
  return g;
}

// smallest distance from z to any entry of values
double multiset_distance(const Vec6c& values, std::complex<double> z) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 6; ++i) best = std::min(best, std::abs(values(i) - z));
  return best;
}

}  // namespace

TEST_CASE("reduced dynamics vanish at the equilibrium point") {
  const RobotParams p = params();
  for (double w : {0.8, M_PI, 7.0}) {
    const QuasiStaticState qs = solve_equilibrium(p, w);
    Vec6 x0 = Vec6::Zero();
    x0.tail<3>() = qs.revolve_rate * Vec3::UnitZ() -
                   qs.drive_speed * rotation_y(qs.axis_tilt).col(2);
    CHECK(reduced_dynamics(p, qs, x0).norm() < 1e-8);
  }
}

TEST_CASE("companion form has exact zero and identity blocks") {
  const RobotParams p = params();
  const Mat6 companion = linearize(p, solve_equilibrium(p, M_PI));
  CHECK(companion.topLeftCorner<3, 3>() == Mat3::Zero());
  CHECK(companion.topRightCorner<3, 3>() == Mat3::Identity());
}

TEST_CASE("linearization is insensitive to the finite-difference step") {
  const RobotParams p = params();
  const QuasiStaticState qs = solve_equilibrium(p, M_PI);
  const Mat6 a = linearize(p, qs, 1e-6);
  const Mat6 b = linearize(p, qs, 5e-7);
  CHECK((a - b).norm() < 1e-4 * std::max(1.0, a.norm()));
}

TEST_CASE("linearization rejects bad steps, branches and non-equilibria") {
  const RobotParams p = params();
  QuasiStaticState qs = solve_equilibrium(p, M_PI);
  CHECK_THROWS_AS(linearize(p, qs, 0.0), OutOfRange);
  CHECK_THROWS_AS(linearize(p, qs, -1e-6), OutOfRange);
  QuasiStaticState off = qs;
  off.pendulum_phase += 0.05;  // no longer solves the torque balance
  CHECK_THROWS_AS(linearize(p, off), InvalidState);
  QuasiStaticState wrong = qs;
  wrong.branch = Branch::FastRevolving;
  CHECK_THROWS_AS(linearize(p, wrong), InvalidState);
}

TEST_CASE("spectrum sorts eigenvalues by descending real part") {
  Mat6 diag = Mat6::Zero();
  const double entries[6] = {3.0, 1.0, -2.0, 0.5, -0.5, 0.0};
  for (int i = 0; i < 6; ++i) diag(i, i) = entries[i];
  const Vec6c ev = spectrum(diag);
  const double expected[6] = {3.0, 1.0, 0.5, 0.0, -0.5, -2.0};
  for (int i = 0; i < 6; ++i) {
    CHECK(ev(i).real() == doctest::Approx(expected[i]).epsilon(1e-12));
    CHECK(std::abs(ev(i).imag()) < 1e-12);
  }
}

TEST_CASE("spectrum recovers the roots of a companion polynomial") {
  // monic polynomial with roots 0, -0.5, -1 +/- 2i, -0.14 +/- 0.9i
  const std::vector<std::complex<double>> roots = {
      {0.0, 0.0}, {-0.5, 0.0}, {-1.0, 2.0}, {-1.0, -2.0},
      {-0.14, 0.9}, {-0.14, -0.9}};
  std::vector<std::complex<double>> coeff = {1.0};
  for (const auto& r : roots) {
    std::vector<std::complex<double>> next(coeff.size() + 1, 0.0);
    for (std::size_t i = 0; i < coeff.size(); ++i) {
      next[i] += coeff[i];
      next[i + 1] -= coeff[i] * r;
    }
    coeff = next;
  }
  Mat6 companion = Mat6::Zero();
  companion.topRightCorner<5, 5>().setIdentity();
  for (int j = 0; j < 6; ++j) companion(5, j) = -coeff[6 - j].real();
  const Vec6c ev = spectrum(companion);
  for (const auto& r : roots) CHECK(multiset_distance(ev, r) < 1e-8);
  // descending real parts
  for (int i = 1; i < 6; ++i) CHECK(ev(i).real() <= ev(i - 1).real() + 1e-12);
}

TEST_CASE("recovery reads the slowest non-trivial mode") {
  Vec6c ev;
  ev << std::complex<double>(0.0, 0.0), std::complex<double>(-0.14, 0.9),
      std::complex<double>(-0.14, -0.9), std::complex<double>(-0.5, 0.0),
      std::complex<double>(-1.0, 2.0), std::complex<double>(-1.0, -2.0);
  const RecoveryInfo info = recovery(ev);
  CHECK(info.trivial_index == 0);
  CHECK(info.slowest_real == doctest::Approx(-0.14));
  CHECK(info.recovery_time == doctest::Approx(1.0 / 0.14));
  CHECK(info.stable);
}

TEST_CASE("recovery flags unstable spectra") {
  Vec6c ev;
  ev << std::complex<double>(0.2, 1.0), std::complex<double>(0.2, -1.0),
      std::complex<double>(1e-12, 0.0), std::complex<double>(-0.5, 0.0),
      std::complex<double>(-1.0, 0.0), std::complex<double>(-2.0, 0.0);
  const RecoveryInfo info = recovery(ev);
  CHECK(info.trivial_index == 2);
  CHECK(info.slowest_real == doctest::Approx(0.2));
  CHECK_FALSE(info.stable);
  CHECK(info.recovery_time < 0.0);
}

TEST_CASE("recovery refuses an ambiguous symmetry mode") {
  Vec6c ev;
  ev << std::complex<double>(0.0, 0.0), std::complex<double>(1e-9, 0.5),
      std::complex<double>(1e-9, -0.5), std::complex<double>(-0.5, 0.0),
      std::complex<double>(-1.0, 0.0), std::complex<double>(-2.0, 0.0);
  try {
    recovery(ev);
    FAIL("expected DegenerateInput");
  } catch (const DegenerateInput& e) {
    CHECK(std::string(e.what()).find("ambiguous") != std::string::npos);
  }
}

TEST_CASE("static equilibrium spectrum matches frozen values") {
  const RobotParams p = params();
  const StabilityReport rep = analyze_stability(p, solve_equilibrium(p, 0.0));
  CHECK(rep.trivial_index == 0);
  CHECK(std::abs(rep.eigenvalues(0)) < 1e-7);
  // pure spin decay at damping / shell inertia
  CHECK(multiset_distance(rep.eigenvalues,
                          {-p.damping / p.shell_inertia, 0.0}) < 1e-6);
  // rocking mode, twice over (x and y are equivalent at rest)
  int hits = 0;
  for (int i = 0; i < 6; ++i)
    if (std::abs(rep.eigenvalues(i) -
                 std::complex<double>(-0.13295906, 3.91479877)) < 1e-5 ||
        std::abs(rep.eigenvalues(i) -
                 std::complex<double>(-0.13295906, -3.91479877)) < 1e-5)
      ++hits;
  CHECK(hits == 4);
  CHECK(rep.stable);
  CHECK(rep.recovery_time == doctest::Approx(7.521112).epsilon(1e-4));
}

TEST_CASE("mid-range spectrum matches frozen values") {
  const RobotParams p = params();
  const StabilityReport rep =
      analyze_stability(p, solve_equilibrium(p, 4.616));
  CHECK(std::abs(rep.eigenvalues(rep.trivial_index)) < 1e-7);
  CHECK(rep.trivial_alignment > 0.99);
  for (const std::complex<double> z :
       {std::complex<double>(-0.12943772, 6.34577242),
        std::complex<double>(-0.12943772, -6.34577242),
        std::complex<double>(-0.16094754, 2.92699067),
        std::complex<double>(-0.16094754, -2.92699067),
        std::complex<double>(-0.93150570, 0.0)}) {
    CHECK(multiset_distance(rep.eigenvalues, z) < 2e-5);
  }
  CHECK(rep.stable);
  CHECK(rep.recovery_time == doctest::Approx(7.725723).epsilon(1e-4));
}

TEST_CASE("complex eigenvalues come in conjugate pairs") {
  const RobotParams p = params();
  const StabilityReport rep = analyze_stability(p, solve_equilibrium(p, M_PI));
  for (int i = 0; i < 6; ++i) {
    if (std::abs(rep.eigenvalues(i).imag()) < 1e-9) continue;
    CHECK(multiset_distance(rep.eigenvalues, std::conj(rep.eigenvalues(i))) <
          1e-9);
  }
  // trace of the companion equals the eigenvalue sum
  const Mat6 companion = linearize(p, solve_equilibrium(p, M_PI));
  std::complex<double> sum = 0.0;
  for (int i = 0; i < 6; ++i) sum += rep.eigenvalues(i);
  CHECK(sum.real() == doctest::Approx(companion.trace()).epsilon(1e-8));
  CHECK(std::abs(sum.imag()) < 1e-9);
}

TEST_CASE("stronger damping speeds up recovery") {
  RobotParams p = params();
  const double base =
      analyze_stability(p, solve_equilibrium(p, M_PI)).recovery_time;
  p.damping *= 1.5;
  const double damped =
      analyze_stability(p, solve_equilibrium(p, M_PI)).recovery_time;
  CHECK(damped < base);
}

TEST_CASE("the whole operating range is stable with sensible recovery") {
  const RobotParams p = params();
  const EquilibriumTable tab = sweep_equilibria(p, grid(3.0 * M_PI, 50));
  const StabilitySweep sweep = stability_sweep(p, tab);
  CHECK(sweep.failures.empty());
  REQUIRE(sweep.reports.size() == 50);
  for (const StabilityReport& rep : sweep.reports) {
    CHECK(rep.stable);
    CHECK(rep.recovery_time > 1.0);
    CHECK(rep.recovery_time < 60.0);
    CHECK(rep.trivial_alignment > 0.9);
  }
}
