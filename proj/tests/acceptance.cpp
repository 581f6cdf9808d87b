// One pass/fail line per acceptance criterion. With an argument N only criterion N runs.

#include "oracles.hpp"
#include "scatter/nodal_inverse.hpp"
#include "scatter/nodal_lines.hpp"
#include "scatter/radial_solver.hpp"
#include "scatter/semiclassical.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>

using namespace scatter;
using oracle::pi;

namespace {

std::vector<double> grid(double a, double b, double h) {
  std::vector<double> g;
  for (int i = 0; a + i * h <= b + 1e-12; ++i) g.push_back(a + i * h);
  return g;
}

struct Outcome {
  bool pass;
  std::string detail;
};

char buf[512];

template <class... A>
std::string fmt(const char* f, A... a) {
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

Potential pcpot() { return piecewise({2, 3}, {-2, -1}); }

// ---------------------------------------------------------------------------

Outcome free_lines() {
  double worst = 0;
  const auto Es = grid(0.5, 100, 0.25);
  for (int n = 1; n <= 4; ++n) {
    const ZeroLine line = trace_fixed_l_line(zero_potential(), 0, n, Es);
    for (const auto& p : line.points) {
      const double ref = n * pi / std::sqrt(p.E);
      worst = std::max(worst, p.diverged ? INFINITY : std::abs(p.r / ref - 1));
    }
  }
  return {worst <= 1e-8, fmt("max relative error %.2e over n=1..4, E in [0.5, 100]", worst)};
}

Outcome bargmann_lines() {
  const Potential V = bargmann_transparent(1, 1);
  TraceOptions opt;
  opt.r_cap = 1e4;
  bool monotone = true;
  for (int n = 1; n <= 4; ++n) {
    const double E_lo = n == 1 ? -1 + 1e-3 : 1e-3;
    std::vector<double> Es;
    for (double E = 4; E > E_lo; E -= 0.05) Es.push_back(E);
    Es.push_back(E_lo);
    std::reverse(Es.begin(), Es.end());
    const ZeroLine line = trace_fixed_l_line(V, 0, n, Es, opt);
    for (std::size_t i = 1; i < line.points.size(); ++i) {
      const auto &a = line.points[i - 1], &b = line.points[i];
      if (a.diverged || b.diverged) continue;
      if (!(b.r < a.r)) monotone = false;
    }
  }
  const double r1 = locate_zero(V, 0, -1 + 1e-3, 1, 1e4).r;
  bool higher_ok = true;
  std::string hd;
  for (int n = 2; n <= 4; ++n) {
    const ZeroInfo below = locate_zero(V, 0, -1e-3, n, 1e4);
    const ZeroInfo near = locate_zero(V, 0, 1e-3, n, 1e4);
    const ZeroInfo far = locate_zero(V, 0, 1.0, n, 1e4);
    higher_ok = higher_ok && !below.found && near.found && near.r > 50 && far.found && far.r < 50;
    hd += fmt(" r%d(1e-3)=%.3g", n, near.r);
  }
  const bool pass = monotone && r1 > 50 && higher_ok;
  return {pass, fmt("monotone=%s r1(-1+1e-3)=%.4g (needs > 50)", monotone ? "yes" : "no", r1) + hd};
}

Outcome pcpot_reconstruction() {
  const InverseLine line = sample_energy_line(pcpot(), 0, 1, grid(0.5, 6, 0.01));
  const auto ev = detect_discontinuities(line);
  if (ev.size() != 2) return {false, fmt("%zu discontinuities reported", ev.size())};
  const Potential V = reconstruct_piecewise(ev);
  const auto br = V.breakpoints();
  const double e_br = std::max(std::abs(br[0] - 2), std::abs(br[1] - 3));
  const double e_v = std::max(std::abs(V(0.5 * br[0]) + 2), std::abs(V(0.5 * (br[0] + br[1])) + 1));
  const double tail = V(br[1] + 1);
  return {e_br <= 0.02 && e_v <= 0.02 && tail == 0.0,
          fmt("2 events; breakpoints (%.6f, %.6f), values (%.6f, %.6f), tail %g", br[0], br[1], V(0.5 * br[0]),
              V(0.5 * (br[0] + br[1])), tail)};
}

Outcome derivative_identity() {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> uE(0.3, 30), ul(0, 5);
  const std::vector<Potential> pots = {pcpot(), gaussian(-3, 1), exponential(2, 1)};
  double worst = 0;
  int count = 0;
  for (int i = 0; i < 50; ++i) {
    const Potential& V = pots[static_cast<std::size_t>(i) % pots.size()];
    const double E = uE(rng), l = ul(rng);
    const auto d = line_derivative_exact(V, l, E, 1);
    const double h = 1e-4 * E, g = 1e-4;
    const double fdE = (locate_zero(V, l, E + h, 1, 100).r - locate_zero(V, l, E - h, 1, 100).r) / (2 * h);
    const double fdl = (locate_zero(V, l + g, E, 1, 100).r - locate_zero(V, l - g, E, 1, 100).r) / (2 * g);
    worst = std::max({worst, std::abs(d.dr_dE / fdE - 1), std::abs(d.dr_dell / fdl - 1)});
    ++count;
  }
  return {worst <= 1e-4, fmt("max relative deviation %.2e on %d points, 3 potentials", worst, count)};
}

Outcome wronskian() {
  const std::vector<std::pair<Potential, Potential>> pairs = {
      {zero_potential(), pcpot()}, {gaussian(-1, 1), square_well(0.5, 1)}, {pcpot(), exponential(1, 2)}};
  double worst = 0;
  int count = 0;
  for (const auto& [a, b] : pairs) {
    const ZeroLine line = trace_fixed_l_line(a, 0, 1, grid(0.5, 15, 0.5), TraceOptions{.refine = false});
    const auto p = wronskian_residual(a, b, line);
    worst = std::max(worst, p.max_residual);
    count += static_cast<int>(p.r.size());
  }
  return {worst < 1e-7 && count == 90, fmt("max residual %.2e over %d (pair, energy) samples", worst, count)};
}

Outcome spectral() {
  const SpectralData s = spectral_data_at(zero_potential(), 0, 1, 5);
  double worst = 0;
  for (int n = 1; n <= 5; ++n) {
    worst = std::max(worst, std::abs(s.eigenvalues[n - 1] / (n * n * pi * pi) - 1));
    worst = std::max(worst, std::abs(s.norming[n - 1] * (2 * n * n * pi * pi) - 1));
  }
  return {s.eigenvalues.size() == 5 && worst <= 1e-7, fmt("max relative error %.2e for n=1..5", worst)};
}

Outcome abel_round_trips() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> uA(-0.3, 0.3), us(1.0, 4.0), uk0(1.0, 4.0);
  double worst_e = 0, worst_f = 0, worst_l = 0;
  const auto lam = grid(0.5, 60, 0.05);
  for (int c = 0; c < 10; ++c) {
    const double A = uA(rng), s = us(rng), k0 = uk0(rng);
    const bool power = c % 2;
    auto y = [=](double l) { return power ? A / (1 + std::pow(l / s, 4)) : A * std::exp(-l / s); };
    auto dy = [=](double l) {
      const double u = l / s;
      return power ? -4 * A / s / (1 / (u * u * u) + 2 * u + std::pow(u, 5)) : -A / s * std::exp(-u);
    };
    PhaseShiftTable t;
    t.ell0 = 0;
    t.k0 = k0;
    t.lambda = lam;
    for (double l : lam) t.delta_lambda.push_back(oracle::fixed_energy_phase(dy, l));
    const TurningPointCurve curve = abel_invert_fixed_energy(t);
    const PhaseSamples back = sabatier_forward(curve);
    for (std::size_t i = lam.size() / 10; i < lam.size() * 9 / 10; ++i) {
      worst_e = std::max(worst_e, std::abs(curve.radius[i] / (lam[i] / k0 * std::exp(y(lam[i]))) - 1));
      const double d = t.delta_lambda[i];
      worst_f = std::max(worst_f, std::abs(back.delta[i] - d) / (std::abs(d) + 1e-6));
    }

    // fixed-l branch: r(lambda0, k) - lambda0 / k vanishing at k = 0
    const double lambda0 = 0.5 + 2 * std::abs(uA(rng)) * 10, B = uA(rng), w = us(rng);
    auto f = [=](double k) { return B * k * k * std::exp(-k * k / (w * w)); };
    PhaseShiftTable u;
    u.ell0 = lambda0 - 0.5;
    u.k0 = k0;
    u.k = grid(k0, k0 + 20, 0.05);
    for (double k : u.k) u.delta_k.push_back(oracle::fixed_l_phase(f, k));
    PhaseSamples low;
    for (double k = 0; k < k0 - 1e-9; k += 0.05) {
      low.x.push_back(k);
      low.delta.push_back(oracle::fixed_l_phase(f, k));
    }
    const TurningPointCurve cl = abel_invert_fixed_l(u, low);
    for (std::size_t i = u.k.size() / 10; i < u.k.size() * 9 / 10; ++i)
      worst_l = std::max(worst_l, std::abs(cl.radius[i] / (lambda0 / u.k[i] + f(u.k[i])) - 1));
  }
  return {worst_e <= 1e-3 && worst_f <= 1e-3 && worst_l <= 1e-3,
          fmt("max relative error: fixed-energy %.2e (forward of inverse %.2e), fixed-l %.2e (10 curves each)",
              worst_e, worst_f, worst_l)};
}

Outcome mixed_jwkb() {
  const Potential g = gaussian(0.2, 1);
  const PhaseShiftTable t = jwkb_phase_table(g, 1.5, 4, grid(4, 40, 0.05), grid(2, 30, 0.05));
  const JwkbReconstruction rec = mixed_jwkb_invert(t);
  double worst = 0;
  int used = 0;
  for (const TurningPointCurve* c : {&rec.inner, &rec.outer}) {
    const auto V = c->potential();
    for (std::size_t i = 0; i < V.size(); ++i) {
      const double exact = g(c->radius[i]);
      if (std::abs(exact) <= 0.02) continue;
      worst = std::max(worst, std::abs(V[i] / exact - 1));
      ++used;
    }
  }
  const double seam = rec.seam_residual / (std::abs(g(rec.r0)) + 0.01);
  return {worst <= 0.07 && seam <= 0.05 && used > 0,
          fmt("max relative error %.2e on %d radii, seam residual %.2e of local |V|+0.01", worst, used, seam)};
}

Outcome born_pipeline() {
  const Potential pc = pcpot();
  const BornTransform t = born_g_from_potential(pc, grid(0, 400, 0.1));
  const auto radii = grid(0.05, 5, 0.05);
  const auto rV = born_invert_rV(t, radii);
  double pair = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (std::abs(radii[i] - 2) < 0.1 || std::abs(radii[i] - 3) < 0.1) continue;
    pair = std::max(pair, std::abs(rV[i] - radii[i] * pc(radii[i])));
  }

  const double V0 = 0.1, a = 2, k0 = 5;
  const Potential w = square_well(V0, a);
  const BornTransform low = born_g_from_potential(w, grid(0, 2 * k0, 0.1));
  std::vector<double> k = grid(k0, 100, 0.1), d;
  for (double kk : k) d.push_back(V0 / kk * (a / 2 - std::sin(2 * kk * a) / (4 * kk)));
  const auto rw = grid(0.1, 4, 0.05);
  const BornReconstruction rec = born_extend_and_invert(low, k, d, rw);
  double weak = 0;
  for (std::size_t i = 0; i < rw.size(); ++i) {
    if (std::abs(rw[i] - a) < 0.2) continue;
    weak = std::max(weak, std::abs(rec.rV[i] / rw[i] - w(rw[i])) / V0);
  }
  return {pair <= 1e-3 && weak <= 0.1,
          fmt("pair max |rV error| %.2e (|r-a| >= 0.1); weak well max error %.2e of V0 (|r-a| >= 0.2)", pair, weak)};
}

Outcome line_independence() {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> ub(0.5, 4.0), uv(-3.0, 0.0);
  std::vector<double> br, vals;
  for (;;) {
    br = {ub(rng), ub(rng), ub(rng)};
    std::sort(br.begin(), br.end());
    if (br[1] - br[0] >= 0.5 && br[2] - br[1] >= 0.5) break;
  }
  for (;;) {
    vals = {uv(rng), uv(rng), uv(rng)};
    if (std::abs(vals[0] - vals[1]) >= 0.3 && std::abs(vals[1] - vals[2]) >= 0.3 && std::abs(vals[2]) >= 0.3) break;
  }
  const Potential V = piecewise(br, vals);
  const auto radii = grid(0.4, 5, 0.01);
  const Potential R1 = reconstruct_piecewise(sample_energy_line(V, 0, 1, radii));
  const Potential R2 = reconstruct_piecewise(sample_energy_line(V, 0, 2, radii));
  if (R1.breakpoints().size() != 3 || R2.breakpoints().size() != 3)
    return {false, fmt("event counts %zu and %zu", R1.breakpoints().size(), R2.breakpoints().size())};
  double worst = 0;
  for (std::size_t j = 0; j < 3; ++j) {
    const double mid = 0.5 * ((j ? br[j - 1] : 0.0) + br[j]);
    worst = std::max(worst, std::abs(R1(mid) - R2(mid)));
    worst = std::max(worst, std::abs(R1.breakpoints()[j] - R2.breakpoints()[j]));
  }
  return {worst <= 1e-2, fmt("steps at (%.3f, %.3f, %.3f): lines 1 and 2 differ by at most %.2e", br[0], br[1], br[2], worst)};
}

struct Criterion {
  const char* name;
  double budget;  // seconds
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all = {
      {"free-line closed form", 10, free_lines},
      {"bargmann lines", 60, bargmann_lines},
      {"step potential reconstruction", 60, pcpot_reconstruction},
      {"line derivative identity", 120, derivative_identity},
      {"wronskian identity", 60, wronskian},
      {"free spectral data", 10, spectral},
      {"abel round trips", 60, abel_round_trips},
      {"mixed jwkb inversion", 300, mixed_jwkb},
      {"born pipeline", 60, born_pipeline},
      {"line independence", 120, line_independence},
  };
  std::size_t first = 0, last = all.size();
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > static_cast<int>(all.size())) {
      std::fprintf(stderr, "criterion must be 1..%zu\n", all.size());
      return 2;
    }
    first = static_cast<std::size_t>(n - 1);
    last = first + 1;
  }
  int failures = 0;
  for (std::size_t i = first; i < last; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = dt < all[i].budget;
    const bool pass = o.pass && in_time;
    failures += !pass;
    std::printf("criterion %zu (%s): %s  [%.2fs of %.0fs] %s\n", i + 1, all[i].name, pass ? "PASS" : "FAIL", dt,
                all[i].budget, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
