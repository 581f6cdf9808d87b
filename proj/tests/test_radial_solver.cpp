#include "oracles.hpp"
#include "scatter/radial_solver.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace scatter;
using oracle::pi;

namespace {

Potential pcpot() { return piecewise({2, 3}, {-2, -1}); }

double mod_pi_distance(double a, double b) { return std::abs(std::remainder(a - b, pi)); }

}  // namespace

TEST_CASE("free s-wave is sin r") {
  ShootOptions opt;
  opt.r_end = 10;
  opt.record = true;
  RegularSolution s(zero_potential(), 0, 1, opt);
  CHECK(s.at(pi / 2).psi == doctest::Approx(1.0).epsilon(1e-10));
  REQUIRE(s.zeros().size() == 3);
  for (int n = 1; n <= 3; ++n) CHECK(s.zeros()[n - 1].r == doctest::Approx(n * pi).epsilon(1e-12));
}

TEST_CASE("free p-wave closed form") {
  ShootOptions opt;
  opt.r_end = 4;
  opt.record = true;
  RegularSolution s(zero_potential(), 1, 1, opt);
  CHECK(s.at(pi).psi == doctest::Approx(3.0).epsilon(1e-10));
  for (double r : {0.3, 1.0, 2.5})
    CHECK(s.at(r).psi == doctest::Approx(3 * (std::sin(r) / r - std::cos(r))).epsilon(1e-9));
}

TEST_CASE("step potential matches transfer matrices") {
  const oracle::StepWave w({2, 3}, {-2, -1}, 4.0);
  ShootOptions opt;
  opt.r_end = 8;
  opt.record = true;
  RegularSolution s(pcpot(), 0, 4, opt);
  for (double r : {0.5, 1.9, 2.0, 2.7, 3.0, 5.0, 7.5}) {
    CHECK(s.at(r).psi == doctest::Approx(w.psi(r)).epsilon(1e-8));
    CHECK(s.at(r).dpsi == doctest::Approx(w.dpsi(r)).epsilon(1e-8));
  }
  const auto tr = integrate_regular(pcpot(), 0, 4, 8);
  REQUIRE(tr.zeros.size() >= 4);
  for (std::size_t n = 0; n < tr.zeros.size(); ++n)
    CHECK(tr.zeros[n] == doctest::Approx(w.nth_zero(static_cast<int>(n + 1), 8)).epsilon(1e-8));
}

TEST_CASE("zeros are simple and converge with the tolerance") {
  for (const Potential& V : {pcpot(), gaussian(-3, 1), bargmann_transparent(1, 1)}) {
    SolverConfig tight;
    tight.rel_tol = 0.5e-12;
    const auto a = integrate_regular(V, 0, 2.5, 12);
    const auto b = integrate_regular(V, 0, 2.5, 12, tight);
    REQUIRE(a.zeros.size() == b.zeros.size());
    for (std::size_t n = 0; n < a.zeros.size(); ++n) {
      CHECK(std::abs(a.zero_slopes[n]) > 1e-8);
      CHECK(std::abs(a.zeros[n] - b.zeros[n]) < 1e-8 * a.zeros[n]);
    }
  }
}

TEST_CASE("node count is monotone in E and l") {
  const Potential V = gaussian(-4, 1.2);
  std::size_t prev = 0;
  for (double E = 0.25; E <= 16; E += 0.25) {
    const auto n = integrate_regular(V, 1, E, 10).zeros.size();
    CHECK(n >= prev);
    prev = n;
  }
  prev = 1000;
  for (double l = 0; l <= 8; l += 0.5) {
    const auto n = integrate_regular(V, l, 9, 10).zeros.size();
    CHECK(n <= prev);
    prev = n;
  }
}

TEST_CASE("free phase shift vanishes") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ul(0, 6), uk(0.2, 10);
  for (int i = 0; i < 20; ++i) {
    const double l = std::floor(ul(rng)), k = uk(rng);
    CHECK(std::abs(phase_shift(zero_potential(), l, k).delta) < 1e-12);
  }
}

TEST_CASE("square well phase shifts") {
  CHECK(mod_pi_distance(phase_shift(square_well(2, 2), 0, 1).delta, oracle::square_well_phase(2, 2, 1)) < 1e-8);
  for (double k = 0.2; k <= 10; k += 0.35)
    CHECK(mod_pi_distance(phase_shift(square_well(2, 2), 0, k).delta, oracle::square_well_phase(2, 2, k)) < 1e-8);
}

TEST_CASE("step potential phase shift") {
  for (double k : {0.3, 1.0, 2.0, 5.0}) {
    const oracle::StepWave w({2, 3}, {-2, -1}, k * k);
    CHECK(mod_pi_distance(phase_shift(pcpot(), 0, k).delta, w.phase_shift()) < 1e-9);
  }
}

TEST_CASE("bargmann phase shift") {
  // The closed form adds a bound state at -kappa^2 to the free problem; its
  // Jost function gives delta = 2 atan(kappa / k), not a vanishing shift.
  for (double k : {0.5, 1.0, 2.0})
    CHECK(mod_pi_distance(phase_shift(bargmann_transparent(1, 1), 0, k).delta, 2 * std::atan(1 / k)) < 1e-6);
}

TEST_CASE("bound states") {
  CHECK(count_bound_states(zero_potential(), 0).energies.empty());

  const auto b = count_bound_states(bargmann_transparent(1, 1), 0);
  REQUIRE(b.energies.size() == 1);
  CHECK(b.energies[0] == doctest::Approx(-1.0).epsilon(1e-6));

  const auto w = count_bound_states(square_well(4, 2), 0);
  CHECK(static_cast<int>(w.energies.size()) == oracle::square_well_bound_count(4, 2));
  REQUIRE(w.energies.size() == 1);
  const double kappa = oracle::bisect(
      [](double x) {
        const double kp = std::sqrt(4 - x * x);
        return kp * std::cos(2 * kp) + x * std::sin(2 * kp);
      },
      1e-9, 2 - 1e-9);
  CHECK(w.energies[0] == doctest::Approx(-kappa * kappa).epsilon(1e-8));

  // deeper well, more states
  CHECK(static_cast<int>(count_bound_states(square_well(40, 2), 0).energies.size()) ==
        oracle::square_well_bound_count(40, 2));
}

TEST_CASE("invalid solver input") {
  CHECK_THROWS(phase_shift(zero_potential(), 0, -1));
  CHECK_THROWS(integrate_regular(zero_potential(), -1, 1, 5));
}
