#include "oracles.hpp"
#include "scatter/nodal_inverse.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace scatter;

namespace {

Potential pcpot() { return piecewise({2, 3}, {-2, -1}); }

std::vector<double> grid(double a, double b, double h) {
  std::vector<double> g;
  for (int i = 0; a + i * h <= b + 1e-12; ++i) g.push_back(a + i * h);
  return g;
}

struct Steps {
  std::vector<double> br, vals;
};

// three steps, breakpoints in [0.5, 4] at least 0.5 apart, neighbouring values at least 0.3 apart
Steps random_steps(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ub(0.5, 4.0), uv(-3.0, 0.0);
  Steps s;
  for (;;) {
    s.br = {ub(rng), ub(rng), ub(rng)};
    std::sort(s.br.begin(), s.br.end());
    if (s.br[1] - s.br[0] >= 0.5 && s.br[2] - s.br[1] >= 0.5) break;
  }
  for (;;) {
    s.vals = {uv(rng), uv(rng), uv(rng)};
    if (std::abs(s.vals[0] - s.vals[1]) >= 0.3 && std::abs(s.vals[1] - s.vals[2]) >= 0.3 &&
        std::abs(s.vals[2]) >= 0.3)
      break;
  }
  return s;
}

double step_value(const Potential& V, double lo, double hi) { return V(0.5 * (lo + hi)); }

}  // namespace

TEST_CASE("step potential line: events and values") {
  const InverseLine line = sample_energy_line(pcpot(), 0, 1, grid(0.5, 6, 0.01));
  const auto ev = detect_discontinuities(line);
  REQUIRE(ev.size() == 2);
  CHECK(ev[0].location == doctest::Approx(2.0).epsilon(1e-4));
  CHECK(ev[1].location == doctest::Approx(3.0).epsilon(1e-4));
  // V(a+) - V(a-) from the third-derivative jump
  CHECK(ev[0].inferred_jump == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(ev[1].inferred_jump == doctest::Approx(1.0).epsilon(1e-2));

  const Potential V = reconstruct_piecewise(ev);
  REQUIRE(V.breakpoints().size() == 2);
  CHECK(V(1.0) == doctest::Approx(-2.0).epsilon(1e-3));
  CHECK(V(2.5) == doctest::Approx(-1.0).epsilon(1e-3));
  CHECK(V(4.0) == 0.0);
}

TEST_CASE("free line has no events") {
  const InverseLine line = sample_energy_line(zero_potential(), 0, 1, grid(0.5, 6, 0.01));
  CHECK(detect_discontinuities(line).empty());
  CHECK(reconstruct_piecewise(line).is_zero());
  CHECK(reconstruct_from_rE_line(to_zero_line(line)).is_zero());
  CHECK(reconstruct_piecewise(std::vector<DiscontinuityEvent>{}).is_zero());
}

TEST_CASE("single step well") {
  const Potential well = piecewise({1}, {-1});
  const InverseLine line = sample_energy_line(well, 0, 1, grid(0.4, 3, 0.01));
  const auto ev = detect_discontinuities(line);
  REQUIRE(ev.size() == 1);
  CHECK(ev[0].location == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(ev[0].inferred_jump == doctest::Approx(1.0).epsilon(1e-2));
  const Potential rE = reconstruct_from_rE_line(to_zero_line(line));
  REQUIRE(rE.breakpoints().size() == 1);
  CHECK(rE(0.5) == doctest::Approx(-1.0).epsilon(1e-2));
}

TEST_CASE("jump identity on constructed steps") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 3; ++trial) {
    const Steps s = random_steps(rng);
    const Potential V = piecewise(s.br, s.vals);
    for (int n : {1, 2}) {
      const InverseLine line = sample_energy_line(V, 0, n, grid(0.4, 5, 0.01));
      const auto ev = detect_discontinuities(line);
      REQUIRE(ev.size() == 3);
      for (std::size_t j = 0; j < 3; ++j) {
        const double jump = (j + 1 < 3 ? s.vals[j + 1] : 0.0) - s.vals[j];
        CHECK(std::abs(ev[j].location - s.br[j]) < 0.01);
        CHECK(std::abs(ev[j].inferred_jump - jump) <= 1e-2 * std::abs(jump));
      }
    }
  }
}

TEST_CASE("random three-step round trip and line independence") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 3; ++trial) {
    const Steps s = random_steps(rng);
    const Potential V = piecewise(s.br, s.vals);
    const Potential R1 = reconstruct_piecewise(sample_energy_line(V, 0, 1, grid(0.4, 5, 0.01)));
    const Potential R2 = reconstruct_piecewise(sample_energy_line(V, 0, 2, grid(0.4, 5, 0.01)));
    for (const Potential* R : {&R1, &R2}) {
      REQUIRE(R->breakpoints().size() == 3);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::abs(R->breakpoints()[j] - s.br[j]) < 0.01);
        const double lo = j ? s.br[j - 1] : 0.0;
        CHECK(std::abs(step_value(*R, lo, s.br[j]) - s.vals[j]) < 1e-2);
      }
    }
    for (std::size_t j = 0; j < 3; ++j) {
      const double lo = j ? s.br[j - 1] : 0.0;
      CHECK(std::abs(step_value(R1, lo, s.br[j]) - step_value(R2, lo, s.br[j])) < 1e-2);
    }
  }
}

TEST_CASE("energy and r(E) routes agree") {
  const InverseLine line = sample_energy_line(pcpot(), 0, 1, grid(0.5, 6, 0.02));
  const auto a = detect_discontinuities(line);
  const auto b = detect_discontinuities_rE(to_zero_line(line));
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  for (std::size_t j = 0; j < 2; ++j) {
    CHECK(std::abs(a[j].location - b[j].location) < 1e-6);
    CHECK(std::abs(a[j].inferred_jump - b[j].inferred_jump) < 1e-6);
  }
}

TEST_CASE("jump profile steps by the potential jump") {
  const InverseLine line = sample_energy_line(pcpot(), 0, 1, grid(0.5, 6, 0.01));
  const auto prof = jump_profile(line);
  REQUIRE(!prof.empty());
  auto at = [&](double r) {
    for (const auto& c : prof)
      if (std::abs(c.r - r) < 1e-9) return c.value;
    FAIL("profile point missing");
    return 0.0;
  };
  // linear extrapolation to the step from either side
  for (double a : {2.0, 3.0}) {
    const double left = 1.5 * at(a - 0.05) - 0.5 * at(a - 0.15);
    const double right = 1.5 * at(a + 0.05) - 0.5 * at(a + 0.15);
    CHECK(std::abs(right - left - 1.0) < 0.05);
  }
}

TEST_CASE("junction step") {
  SUBCASE("free") {
    const ZeroLine m = trace_mixed_line(zero_potential(), 0, 1, 1, grid(1, 400, 1), grid(0, 20, 0.05));
    const auto j = junction_discontinuity(m, 1, 0, 0.0);
    CHECK(j.r0 == doctest::Approx(oracle::pi).epsilon(1e-12));
    CHECK(std::abs(j.v) < 1e-6);
    CHECK(j.V0 == 0.0);
  }
  SUBCASE("step exactly at the junction") {
    // V = -1 inside r0 = pi / sqrt(E0 + 1): the first zero at E0 sits on the step
    const double E0 = 1, r0 = oracle::pi / std::sqrt(E0 + 1);
    const Potential V = piecewise({r0}, {-1});
    const ZeroLine m = trace_mixed_line(V, 0, E0, 1, grid(E0, 600, 0.5), grid(0, 40, 0.02));
    const MixedReconstruction rec = reconstruct_mixed(m);
    CHECK(rec.junction.r0 == doctest::Approx(r0).epsilon(1e-9));
    CHECK(std::abs(rec.junction.v - (-1.0)) < 1e-2);
    CHECK(std::abs(rec.potential(0.5 * r0) + 1) < 1e-2);
    CHECK(std::abs(rec.potential(r0 + 1)) < 1e-2);
  }
  SUBCASE("junction away from the steps") {
    const ZeroLine m = trace_mixed_line(pcpot(), 0, 6, 1, grid(6, 600, 0.5), grid(0, 40, 0.02));
    const MixedReconstruction rec = reconstruct_mixed(m);
    CHECK(rec.junction.r0 < 2);
    CHECK(std::abs(rec.junction.v) < 1e-3);
    CHECK(rec.potential(1.0) == doctest::Approx(-2).epsilon(1e-2));
    CHECK(rec.potential(2.5) == doctest::Approx(-1).epsilon(1e-2));
    CHECK(std::abs(rec.potential(3.5)) < 1e-2);
  }
}

TEST_CASE("wronskian identity") {
  const ZeroLine line = trace_fixed_l_line(zero_potential(), 0, 1, grid(0.5, 15, 0.5));
  SUBCASE("equal potentials") {
    const auto p = wronskian_residual(pcpot(), pcpot(), line);
    for (double w : p.wronskian_direct) CHECK(w == 0.0);
    CHECK(p.max_residual < 1e-9);
  }
  SUBCASE("free against steps") {
    const auto p = wronskian_residual(zero_potential(), pcpot(), line);
    REQUIRE(p.r.size() == line.points.size());
    CHECK(p.max_residual < 1e-7);
  }
  SUBCASE("free against a shallow well: the identity does not vanish") {
    const auto p = wronskian_residual(zero_potential(), square_well(0.5, 1), line);
    double biggest = 0;
    for (double w : p.wronskian_direct) biggest = std::max(biggest, std::abs(w));
    CHECK(biggest > 1e-3);
    CHECK(p.max_residual < 1e-7);
  }
}

TEST_CASE("kernel diagonal keeps its sign") {
  // the sign is fixed only while the zeros of both solutions share a half wave along the line
  const std::vector<std::pair<Potential, Potential>> pairs = {{pcpot(), piecewise({2.1, 3}, {-1.9, -1})},
                                                              {gaussian(-1, 1), square_well(0.5, 1)},
                                                              {pcpot(), exponential(1, 2)}};
  for (const auto& [a, b] : pairs) {
    const ZeroLine line = trace_fixed_l_line(a, 0, 1, grid(1, 20, 1));
    const auto p = wronskian_residual(a, b, line);
    int sign = 0;
    for (double K : p.kernel_diag) {
      REQUIRE(std::isfinite(K));
      const int s = K > 0 ? 1 : -1;
      if (!sign) sign = s;
      CHECK(s == sign);
    }
  }
}
