#include "scatter/potentials.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace scatter;

namespace {

Potential pcpot() { return piecewise({2, 3}, {-2, -1}); }

// -2 d^2/dr^2 ln(1 + c I),  I' = sinh^2(kappa r)
double bargmann_reference(double kappa, double c, double r) {
  const double s = std::sinh(kappa * r);
  const double I = std::sinh(2 * kappa * r) / (4 * kappa) - r / 2;
  const double I1 = s * s, I2 = kappa * std::sinh(2 * kappa * r);
  const double D = 1 + c * I;
  return -2 * (c * I2 * D - c * c * I1 * I1) / (D * D);
}

}  // namespace

TEST_CASE("piecewise values") {
  const Potential V = pcpot();
  CHECK(V(1.0) == -2.0);
  CHECK(V(2.5) == -1.0);
  CHECK(V(3.5) == 0.0);
  CHECK(zero_potential()(7.3) == 0.0);
  // right limit at a breakpoint, left limit on request
  CHECK(V(2.0) == -1.0);
  CHECK(V.left_limit(2.0) == -2.0);
}

TEST_CASE("piecewise evaluation matches the containing interval") {
  const std::vector<double> br = {0.7, 1.3, 2.9, 4.0}, vals = {-3, 1.5, -0.25, 2};
  const Potential V = piecewise(br, vals);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int i = 0; i < 1000; ++i) {
    const double r = u(rng);
    double expect = 0;
    for (std::size_t j = br.size(); j-- > 0;)
      if (r <= br[j]) expect = vals[j];
    if (std::find(br.begin(), br.end(), r) != br.end()) continue;
    CHECK(V(r) == expect);
  }
}

TEST_CASE("invalid piecewise input is rejected") {
  CHECK_THROWS_AS(piecewise({2, 1}, {-1, -2}), DomainError);
  CHECK_THROWS_AS(piecewise({1, 2}, {-1}), DomainError);
  CHECK_THROWS_AS(gaussian(1, -1), DomainError);
}

TEST_CASE("integrability of simple potentials") {
  const auto z = check_integrability(zero_potential(), 1, 10);
  CHECK(z.passes);
  CHECK(z.tail_integral == 0.0);
  CHECK(z.origin_integral == 0.0);

  const auto p = check_integrability(pcpot(), 1, 10);
  CHECK(p.passes);
  // int_1^3 |V| = 2*1 + 1*1 ; int_0^3 r|V| = 2*(4/2) + (9-4)/2
  CHECK(p.tail_integral == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(p.origin_integral == doctest::Approx(6.5).epsilon(1e-10));

  const auto inv_sq = check_integrability(from_function([](double r) { return 1 / (r * r); }, 1.0), 1, 10);
  CHECK_FALSE(inv_sq.passes);
  CHECK(std::isinf(inv_sq.origin_integral));
}

TEST_CASE("exponential integrals include the analytic tail") {
  const auto rep = check_integrability(exponential(-2, 1.5), 0.5, 8);
  CHECK(rep.passes);
  CHECK(rep.tail_integral == doctest::Approx(2 / 1.5 * std::exp(-0.75)).epsilon(1e-9));
  CHECK(rep.origin_integral == doctest::Approx(2 / (1.5 * 1.5)).epsilon(1e-9));
}

TEST_CASE("bargmann closed form") {
  const Potential V = bargmann_transparent(1, 1);
  for (double r : {0.1, 0.5, 1.0, 2.0, 4.0})
    CHECK(V(r) == doctest::Approx(bargmann_reference(1, 1, r)).epsilon(1e-10));
  // exponential decay beyond 5/kappa
  double C = 0;
  for (double r = 5; r <= 15; r += 0.5) C = std::max(C, std::abs(V(r)) * std::exp(2 * r));
  for (double r = 5; r <= 15; r += 0.25) CHECK(std::abs(V(r)) <= 1.01 * C * std::exp(-2 * r));
  CHECK(C < 1e3);
  // c -> 0 removes the well
  const Potential weak = bargmann_transparent(1, 1e-12);
  for (double r : {0.3, 1.0, 3.0}) CHECK(std::abs(weak(r)) < 1e-9);
}

TEST_CASE("tabulated potentials interpolate linearly") {
  const Potential V = tabulated({1, 2, 4}, {-1, -3, 1});
  CHECK(V(0.5) == -1.0);
  CHECK(V(1.5) == doctest::Approx(-2.0));
  CHECK(V(3.0) == doctest::Approx(-1.0));
  CHECK(V(5.0) == 0.0);
}

TEST_CASE("tail radius") {
  const Potential g = gaussian(0.2, 1);
  const double R = g.tail_radius(1e-12);
  CHECK(std::abs(g(R)) <= 1e-12 * 1.0001);
  CHECK(std::abs(g(0.9 * R)) > 1e-12);
  CHECK(pcpot().tail_radius(1e-12) == doctest::Approx(3.0));
}
