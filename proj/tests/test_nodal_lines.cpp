#include "oracles.hpp"
#include "scatter/nodal_lines.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace scatter;
using oracle::pi;

namespace {

Potential pcpot() { return piecewise({2, 3}, {-2, -1}); }

std::vector<double> grid(double a, double b, double h) {
  std::vector<double> g;
  for (int i = 0; a + i * h <= b + 1e-12; ++i) g.push_back(a + i * h);
  return g;
}

TraceOptions no_refine() {
  TraceOptions o;
  o.refine = false;
  return o;
}

}  // namespace

TEST_CASE("free lines are n pi / sqrt(E)") {
  const auto Es = grid(0.5, 100, 0.5);
  for (int n = 1; n <= 4; ++n) {
    const ZeroLine line = trace_fixed_l_line(zero_potential(), 0, n, Es);
    for (const auto& p : line.points) {
      REQUIRE_FALSE(p.diverged);
      CHECK(p.r == doctest::Approx(n * pi / std::sqrt(p.E)).epsilon(1e-10));
    }
  }
}

TEST_CASE("step potential line against transfer matrices") {
  const ZeroLine line = trace_fixed_l_line(pcpot(), 0, 1, grid(0.2, 30, 0.4), no_refine());
  for (std::size_t i = 0; i < line.points.size(); ++i) {
    const auto& p = line.points[i];
    const oracle::StepWave w({2, 3}, {-2, -1}, p.E);
    CHECK(p.r == doctest::Approx(w.nth_zero(1, 40)).epsilon(1e-8));
    if (i) CHECK(p.r < line.points[i - 1].r);
  }
}

TEST_CASE("bargmann lines") {
  const Potential V = bargmann_transparent(1, 1);
  const ZeroLine l1 = trace_fixed_l_line(V, 0, 1, grid(-0.99, 4, 0.01), no_refine());
  for (std::size_t i = 1; i < l1.points.size(); ++i) CHECK(l1.points[i].r < l1.points[i - 1].r);
  // the first zero moves out as E approaches the bound state
  CHECK(locate_zero(V, 0, -0.999, 1, 1e3).r > l1.points.front().r);
  // higher zeros only exist above threshold
  for (int n = 2; n <= 4; ++n) {
    CHECK_FALSE(locate_zero(V, 0, -0.01, n, 50).found);
    const ZeroInfo z = locate_zero(V, 0, 1e-3, n, 1e4);
    REQUIRE(z.found);
    CHECK(z.r > 50);
  }
}

TEST_CASE("lines interlace") {
  for (const Potential& V : {pcpot(), gaussian(-3, 1)}) {
    for (double E : {0.3, 1.0, 4.0, 20.0}) {
      double prev = 0;
      for (int n = 1; n <= 4; ++n) {
        const ZeroInfo z = locate_zero(V, 0.5, E, n, 200);
        REQUIRE(z.found);
        CHECK(z.r > prev);
        prev = z.r;
      }
    }
  }
}

TEST_CASE("high-energy limit approaches the free zeros") {
  const Potential V = gaussian(-3, 1);
  for (int n = 1; n <= 3; ++n) {
    double E = 1;
    for (int j = 0; j < 6; ++j) E *= 4;
    const double x = locate_zero(V, 0, E, n, 50).r * std::sqrt(E);
    CHECK(std::abs(x / (n * pi) - 1) < 0.02);
  }
}

TEST_CASE("free mixed line") {
  const ZeroLine line = trace_mixed_line(zero_potential(), 0, 1, 1, grid(1, 25, 0.5), grid(0, 6, 0.25), no_refine());
  double r0 = 0, prev_ell_r = 0;
  for (const auto& p : line.points) {
    if (p.segment == 1) {
      CHECK(p.r == doctest::Approx(pi / std::sqrt(p.E)).epsilon(1e-10));
      if (p.E == 1) r0 = p.r;
    } else {
      CHECK(p.E == 1);
      CHECK(p.r == doctest::Approx(oracle::free_zero(p.ell, 1)).epsilon(1e-9));
      CHECK(p.r > prev_ell_r);
      prev_ell_r = p.r;
    }
  }
  CHECK(r0 == doctest::Approx(pi).epsilon(1e-12));
}

TEST_CASE("mixed line is monotone along its path") {
  const ZeroLine line = trace_mixed_line(pcpot(), 0, 1, 1, grid(1, 60, 0.5), grid(0, 10, 0.25));
  double prev = 0;
  int seg = 1;
  for (const auto& p : line.points) {
    // both segments carry the junction point
    if (p.segment != seg) {
      CHECK(p.r == doctest::Approx(prev).epsilon(1e-12));
      seg = p.segment;
    } else {
      CHECK(p.r > prev);
    }
    prev = p.r;
  }
}

TEST_CASE("line slopes") {
  for (int n = 1; n <= 3; ++n)
    for (double E : {0.5, 2.0, 9.0}) {
      const auto d = line_derivative_exact(zero_potential(), 0, E, n);
      CHECK(d.dr_dE == doctest::Approx(-n * pi / (2 * std::pow(E, 1.5))).epsilon(1e-9));
    }
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uE(0.2, 30), ul(0, 5);
  for (const Potential& V : {pcpot(), gaussian(-3, 1), exponential(2, 1)}) {
    for (int i = 0; i < 15; ++i) {
      const double E = uE(rng), l = ul(rng);
      const auto d = line_derivative_exact(V, l, E, 1);
      CHECK(d.dr_dE < 0);
      CHECK(d.dr_dell > 0);
      // centred differences of the traced line
      const double h = 1e-4 * E, g = 1e-4;
      const double fdE = (locate_zero(V, l, E + h, 1, 100).r - locate_zero(V, l, E - h, 1, 100).r) / (2 * h);
      const double fdl = (locate_zero(V, l + g, E, 1, 100).r - locate_zero(V, l - g, E, 1, 100).r) / (2 * g);
      CHECK(d.dr_dE == doctest::Approx(fdE).epsilon(1e-4));
      CHECK(d.dr_dell == doctest::Approx(fdl).epsilon(1e-4));
    }
  }
}

TEST_CASE("inverse lines") {
  const ZeroLine line = trace_fixed_l_line(zero_potential(), 0, 2, grid(0.5, 50, 0.5));
  const InverseLine inv = invert_line(line);
  for (std::size_t i = 0; i < inv.r.size(); ++i)
    CHECK(inv.value[i] == doctest::Approx(4 * pi * pi / (inv.r[i] * inv.r[i])).epsilon(1e-10));
  for (double r = inv.r.front(); r < inv.r.back(); r += 0.137)
    CHECK(inv(r) == doctest::Approx(4 * pi * pi / (r * r)).epsilon(1e-3));

  const ZeroLine back = to_zero_line(invert_line(to_zero_line(inv)));
  REQUIRE(back.points.size() == inv.r.size());
  for (std::size_t i = 0; i < inv.r.size(); ++i) {
    CHECK(back.points[i].r == doctest::Approx(inv.r[i]).epsilon(1e-8));
    CHECK(back.points[i].E == doctest::Approx(inv.value[i]).epsilon(1e-8));
  }
}

TEST_CASE("sampled energy line hits the requested radii") {
  const auto radii = grid(0.6, 5, 0.2);
  const InverseLine inv = sample_energy_line(pcpot(), 0, 1, radii);
  REQUIRE(inv.r.size() == radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const oracle::StepWave w({2, 3}, {-2, -1}, inv.value[i]);
    CHECK(w.psi(radii[i]) == doctest::Approx(0.0).scale(1.0).epsilon(1e-8));
    CHECK(w.nth_zero(1, 40) == doctest::Approx(radii[i]).epsilon(1e-8));
  }
}

TEST_CASE("free spectral data") {
  const SpectralData s = spectral_data_at(zero_potential(), 0, 1, 5);
  REQUIRE(s.eigenvalues.size() == 5);
  for (int n = 1; n <= 5; ++n) {
    CHECK(s.eigenvalues[n - 1] == doctest::Approx(n * n * pi * pi).epsilon(1e-10));
    CHECK(s.norming[n - 1] == doctest::Approx(1 / (2 * n * n * pi * pi)).epsilon(1e-10));
  }
}

TEST_CASE("step potential spectral data against shooting") {
  const SpectralData s = spectral_data_at(pcpot(), 0, 5, 6);
  auto end_value = [](double E) { return oracle::StepWave({2, 3}, {-2, -1}, E).psi(5); };
  std::vector<double> oracle_E;
  for (double E = -2.0, h = 1e-3; oracle_E.size() < 6; E += h)
    if ((end_value(E) > 0) != (end_value(E + h) > 0)) oracle_E.push_back(oracle::bisect(end_value, E, E + h));
  REQUIRE(s.eigenvalues.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(s.eigenvalues[i] == doctest::Approx(oracle_E[i]).epsilon(1e-7));
    CHECK(s.norming[i] > 0);
  }
}
