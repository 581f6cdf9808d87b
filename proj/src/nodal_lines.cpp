#include "scatter/nodal_lines.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace scatter {

ZeroInfo locate_zero(const Potential& pot, double ell, double E, int n, double r_cap, const SolverConfig& cfg) {
  if (n < 1) throw DomainError("zero index must be >= 1");
  ShootOptions opt;
  opt.r_end = r_cap;
  opt.stop_after_zeros = n;
  opt.allow_rescale = true;
  RegularSolution sol(pot, ell, E, opt, cfg);
  ZeroInfo z;
  if (static_cast<int>(sol.zeros().size()) < n) return z;
  const auto& p = sol.zeros()[static_cast<std::size_t>(n - 1)];
  z.found = true;
  z.r = p.r;
  z.dpsi = p.dpsi;
  z.int_psi2 = p.int_psi2;
  z.int_psi2_r2 = p.int_psi2_r2;
  return z;
}

double default_r_cap(const Potential& pot) { return 50 * pot.support_scale(); }

namespace {

using PointFn = std::function<LinePoint(double)>;

// Traces x -> r over the grid, refining between neighbours that are far apart
// or straddle a divergence.
std::vector<LinePoint> trace_param(const std::vector<double>& grid, const PointFn& at, const TraceOptions& opt,
                                   double LinePoint::*param) {
  std::vector<LinePoint> out;
  if (grid.empty()) return out;
  std::size_t budget = opt.max_points;
  auto refine = [&](auto&& self, const LinePoint& a, const LinePoint& b, int depth) -> void {
    if (!opt.refine || depth >= opt.max_depth || out.size() >= budget) return;
    bool split = false;
    if (!a.diverged && !b.diverged)
      split = std::abs(a.r - b.r) > opt.max_ratio * std::min(a.r, b.r);
    else if (a.diverged != b.diverged)
      split = true;
    if (!split) return;
    const LinePoint m = at(0.5 * (a.*param + b.*param));
    self(self, a, m, depth + 1);
    out.push_back(m);
    self(self, m, b, depth + 1);
  };
  LinePoint prev = at(grid.front());
  out.push_back(prev);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const LinePoint cur = at(grid[i]);
    refine(refine, prev, cur, 0);
    out.push_back(cur);
    prev = cur;
  }
  return out;
}

LinePoint make_point(const Potential& pot, int segment, bool energy_path, double ell, double E, int n,
                     double r_cap, const SolverConfig& cfg) {
  LinePoint p;
  p.segment = segment;
  p.ell = ell;
  p.E = E;
  const ZeroInfo z = locate_zero(pot, ell, E, n, r_cap, cfg);
  p.r = z.r;
  p.diverged = !z.found;
  if (z.found) p.slope = energy_path ? z.dr_dE() : z.dr_dell(ell);
  return p;
}

}  // namespace

ZeroLine trace_fixed_l_line(const Potential& pot, double ell, int n, const std::vector<double>& E_grid,
                            const TraceOptions& opt) {
  const double cap = opt.r_cap > 0 ? opt.r_cap : default_r_cap(pot);
  ZeroLine line;
  line.n = n;
  line.kind = PathKind::fixed_ell;
  line.ell0 = ell;
  line.E0 = E_grid.empty() ? 0 : E_grid.front();
  line.points = trace_param(
      E_grid, [&](double E) { return make_point(pot, 1, true, ell, E, n, cap, opt.solver); }, opt, &LinePoint::E);
  return line;
}

ZeroLine trace_fixed_E_line(const Potential& pot, double E, int n, const std::vector<double>& ell_grid,
                            const TraceOptions& opt) {
  const double cap = opt.r_cap > 0 ? opt.r_cap : default_r_cap(pot);
  ZeroLine line;
  line.n = n;
  line.kind = PathKind::fixed_energy;
  line.E0 = E;
  line.ell0 = ell_grid.empty() ? 0 : ell_grid.front();
  line.points = trace_param(
      ell_grid, [&](double l) { return make_point(pot, 1, false, l, E, n, cap, opt.solver); }, opt, &LinePoint::ell);
  return line;
}

ZeroLine trace_mixed_line(const Potential& pot, double ell0, double E0, int n, const std::vector<double>& E_grid,
                          const std::vector<double>& ell_grid, const TraceOptions& opt) {
  for (double E : E_grid)
    if (E < E0) throw DomainError("mixed line: energies must be >= E0");
  for (double l : ell_grid)
    if (l < ell0) throw DomainError("mixed line: angular momenta must be >= l0");
  const double cap = opt.r_cap > 0 ? opt.r_cap : default_r_cap(pot);

  // part 1 runs from high energy down to E0, part 2 from l0 upward: r grows along the path
  std::vector<double> Eg(E_grid.begin(), E_grid.end());
  std::sort(Eg.begin(), Eg.end(), std::greater<>());
  if (Eg.empty() || Eg.back() != E0) Eg.push_back(E0);
  std::vector<double> Lg(ell_grid.begin(), ell_grid.end());
  std::sort(Lg.begin(), Lg.end());
  if (Lg.empty() || Lg.front() != ell0) Lg.insert(Lg.begin(), ell0);

  ZeroLine line;
  line.n = n;
  line.kind = PathKind::mixed;
  line.ell0 = ell0;
  line.E0 = E0;
  auto p1 = trace_param(
      Eg, [&](double E) { return make_point(pot, 1, true, ell0, E, n, cap, opt.solver); }, opt, &LinePoint::E);
  auto p2 = trace_param(
      Lg, [&](double l) { return make_point(pot, 2, false, l, E0, n, cap, opt.solver); }, opt, &LinePoint::ell);
  // both parts contain the junction computed from the same (l0, E0) solve
  p2.front().r = p1.back().r;
  p2.front().diverged = p1.back().diverged;
  line.points = std::move(p1);
  line.points.insert(line.points.end(), p2.begin(), p2.end());
  return line;
}

LineDerivative line_derivative_exact(const Potential& pot, double ell, double E, int n, double r_cap,
                                     const SolverConfig& cfg) {
  const double cap = r_cap > 0 ? r_cap : default_r_cap(pot);
  const ZeroInfo z = locate_zero(pot, ell, E, n, cap, cfg);
  if (!z.found) throw NumericalError("line_derivative_exact: zero not found below the cap");
  return {z.r, z.dr_dE(), z.dr_dell(ell)};
}

LineDerivative line_derivative_exact(const Potential& pot, const ZeroLine& line, const LinePoint& p) {
  if (p.diverged) throw NumericalError("line_derivative_exact: diverged point");
  return line_derivative_exact(pot, p.ell, p.E, line.n, std::max(default_r_cap(pot), 2 * p.r));
}

// ---------------------------------------------------------------------------

InverseLine invert_line(const ZeroLine& line, int segment, double repair_tol) {
  InverseLine inv;
  inv.n = line.n;
  if (line.kind == PathKind::mixed && segment == 0)
    throw DomainError("invert_line: choose segment 1 or 2 of a mixed line");
  const bool energy = line.kind == PathKind::fixed_ell || (line.kind == PathKind::mixed && segment == 1);
  inv.variable = energy ? LineVariable::energy : LineVariable::ell;
  inv.fixed = energy ? line.ell0 : line.E0;

  struct Sample {
    double r, value, slope;
    bool operator<(const Sample& o) const { return r < o.r; }
  };
  std::vector<Sample> pts;
  bool slopes = true;
  for (const auto& p : line.points) {
    if (p.diverged || !std::isfinite(p.r)) continue;
    if (segment != 0 && p.segment != segment) continue;
    pts.push_back({p.r, energy ? p.E : p.ell, 1 / p.slope});
    slopes = slopes && std::isfinite(pts.back().slope);
  }
  std::sort(pts.begin(), pts.end());
  if (pts.size() < 2) throw NumericalError("invert_line: fewer than two finite points");

  double lo = pts.front().value, hi = lo;
  for (const auto& q : pts) {
    lo = std::min(lo, q.value);
    hi = std::max(hi, q.value);
  }
  const double tol = repair_tol * std::max(hi - lo, 1e-300);
  const double sign = energy ? -1.0 : 1.0;  // expected direction of value with r

  for (const auto& q : pts) {
    if (!inv.r.empty()) {
      const double step = sign * (q.value - inv.value.back());
      if (q.r <= inv.r.back() || step <= 0) {
        if (std::abs(step) <= tol || q.r <= inv.r.back()) continue;  // repair: drop the offending sample
        throw NumericalError("invert_line: line is not monotone at r = " + std::to_string(q.r));
      }
    }
    inv.r.push_back(q.r);
    inv.value.push_back(q.value);
    if (slopes) inv.exact_slope.push_back(q.slope);
  }
  if (inv.r.size() < 2) throw NumericalError("invert_line: fewer than two monotone points");
  inv.rebuild();
  return inv;
}

ZeroLine to_zero_line(const InverseLine& inv) {
  ZeroLine line;
  line.n = inv.n;
  const bool energy = inv.variable == LineVariable::energy;
  line.kind = energy ? PathKind::fixed_ell : PathKind::fixed_energy;
  if (energy)
    line.ell0 = inv.fixed;
  else
    line.E0 = inv.fixed;
  for (std::size_t i = 0; i < inv.r.size(); ++i) {
    LinePoint p;
    p.r = inv.r[i];
    p.ell = energy ? inv.fixed : inv.value[i];
    p.E = energy ? inv.value[i] : inv.fixed;
    if (inv.exact_slope.size() == inv.r.size()) p.slope = 1 / inv.exact_slope[i];
    line.points.push_back(p);
  }
  return line;
}

// ---------------------------------------------------------------------------

namespace {

struct Solved {
  double x;
  ZeroInfo z;
};

// Root of r(x) = R where s * r(x) increases with x. h(lo) < 0 < h(hi), a missing zero counts as r = inf.
Solved solve_on_line(const std::function<ZeroInfo(double)>& eval, const std::function<double(const ZeroInfo&, double)>& slope,
                     double s, double lo, double hi, double R, double guess) {
  auto h = [&](const ZeroInfo& z) { return z.found ? s * (z.r - R) : s * std::numeric_limits<double>::infinity(); };
  double x = (guess > lo && guess < hi) ? guess : 0.5 * (lo + hi);
  Solved best{x, {}};
  for (int it = 0; it < 200; ++it) {
    const ZeroInfo z = eval(x);
    const double hv = h(z);
    best = {x, z};
    if (z.found && std::abs(z.r - R) <= 1e-14 * R) return best;
    if (hv < 0)
      lo = x;
    else
      hi = x;
    if (hi - lo <= 4e-16 * std::max(1.0, std::abs(x))) return best;
    double next = 0.5 * (lo + hi);
    if (z.found) {
      const double d = slope(z, x);
      if (d != 0 && std::isfinite(d)) {
        const double nx = x - (z.r - R) / d;
        if (nx > lo && nx < hi) next = nx;
      }
    }
    x = next;
  }
  return best;
}

Solved energy_solve(const Potential& pot, double ell, int n, double R, double hi, double guess,
                    const SolverConfig& cfg) {
  const double cap = 4 * R;
  auto eval = [&](double E) { return locate_zero(pot, ell, E, n, cap, cfg); };
  double lo = pot.lower_bound() - 1;
  for (int i = 0; i < 60; ++i) {
    const ZeroInfo z = eval(lo);
    if (!z.found || z.r > R) break;
    lo = 2 * lo - 1;
  }
  // s = -1: r decreases with E
  return solve_on_line(eval, [](const ZeroInfo& z, double) { return z.dr_dE(); }, -1.0, lo, hi, R, guess);
}

double energy_upper(const Potential& pot, double ell, int n, double R) {
  const double j = free_regular_zero(ell, n);
  return pot.upper_bound() + 1.001 * (j / R) * (j / R);
}

Solved ell_solve(const Potential& pot, double E, int n, double R, double lo, double guess, const SolverConfig& cfg) {
  const double cap = 4 * R;
  auto eval = [&](double l) { return locate_zero(pot, l, E, n, cap, cfg); };
  const ZeroInfo zlo = eval(lo);
  if (!zlo.found || zlo.r > R)
    throw NumericalError("ell_on_line: line does not reach the requested radius for l > -1/2");
  double hi = std::max(lo + 1, 1.0);
  for (int i = 0; i < 60; ++i) {
    const ZeroInfo z = eval(hi);
    if (!z.found || z.r > R) break;
    lo = hi;
    hi = 2 * hi + 1;
  }
  return solve_on_line(eval, [](const ZeroInfo& z, double l) { return z.dr_dell(l); }, 1.0, lo, hi, R, guess);
}

}  // namespace

double energy_on_line(const Potential& pot, double ell, int n, double R, const SolverConfig& cfg) {
  if (!(R > 0)) throw DomainError("energy_on_line: R must be positive");
  return energy_solve(pot, ell, n, R, energy_upper(pot, ell, n, R), std::nan(""), cfg).x;
}

double ell_on_line(const Potential& pot, double E, int n, double R, const SolverConfig& cfg) {
  if (!(R > 0)) throw DomainError("ell_on_line: R must be positive");
  return ell_solve(pot, E, n, R, -0.5 + 1e-9, std::nan(""), cfg).x;
}

InverseLine sample_energy_line(const Potential& pot, double ell, int n, const std::vector<double>& radii,
                               const SolverConfig& cfg) {
  InverseLine inv;
  inv.variable = LineVariable::energy;
  inv.n = n;
  inv.fixed = ell;
  std::vector<double> rs(radii);
  std::sort(rs.begin(), rs.end());
  double prevE = std::nan(""), prevR = 0, prevSlope = 0;
  for (double R : rs) {
    double hi = energy_upper(pot, ell, n, R);
    double guess = std::nan("");
    if (!std::isnan(prevE)) {
      hi = std::min(hi, prevE);
      guess = prevE + (R - prevR) * prevSlope;
    }
    const Solved s = energy_solve(pot, ell, n, R, hi, guess, cfg);
    inv.r.push_back(R);
    inv.value.push_back(s.x);
    const double slope = s.z.found ? 1.0 / s.z.dr_dE() : 0.0;
    inv.exact_slope.push_back(slope);
    prevE = s.x;
    prevR = R;
    prevSlope = slope;
  }
  inv.rebuild();
  return inv;
}

InverseLine sample_ell_line(const Potential& pot, double E, int n, const std::vector<double>& radii,
                            const SolverConfig& cfg) {
  InverseLine inv;
  inv.variable = LineVariable::ell;
  inv.n = n;
  inv.fixed = E;
  std::vector<double> rs(radii);
  std::sort(rs.begin(), rs.end());
  double prevL = -0.5 + 1e-9, prevR = 0, prevSlope = 0;
  bool first = true;
  for (double R : rs) {
    const double guess = first ? std::nan("") : prevL + (R - prevR) * prevSlope;
    const Solved s = ell_solve(pot, E, n, R, prevL, guess, cfg);
    inv.r.push_back(R);
    inv.value.push_back(s.x);
    const double slope = s.z.found ? 1.0 / s.z.dr_dell(s.x) : 0.0;
    inv.exact_slope.push_back(slope);
    prevL = s.x;
    prevR = R;
    prevSlope = slope;
    first = false;
  }
  inv.rebuild();
  return inv;
}

SpectralData spectral_data_at(const Potential& pot, double ell, double R, int n_max, const SolverConfig& cfg) {
  SpectralData sd;
  sd.R = R;
  sd.ell = ell;
  for (int n = 1; n <= n_max; ++n) {
    try {
      const Solved s = energy_solve(pot, ell, n, R, energy_upper(pot, ell, n, R), std::nan(""), cfg);
      if (!s.z.found || std::abs(s.z.r - R) > 1e-9 * R) break;
      sd.eigenvalues.push_back(s.x);
      sd.norming.push_back(-s.z.dr_dE());
    } catch (const NumericalError&) {
      break;
    }
  }
  return sd;
}

}  // namespace scatter
