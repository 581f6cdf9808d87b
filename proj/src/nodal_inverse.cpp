#include "scatter/nodal_inverse.hpp"

#include "scatter/numerics.hpp"
#include "scatter/radial_solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <tuple>

namespace scatter {

namespace {

struct GapFit {
  double x_lo = 0, x_hi = 0;  // grid gap in the fit variable
  double a = 0;               // located breakpoint in the fit variable
  PolyFit left, right;
  double resid = 0;
  DiscontinuityEvent ev;
  double stat = 0;
};

// Fills ev (location as a radius, slope, jump_third, inferred_jump) from the
// two one-sided fits evaluated at a.
using Converter = std::function<void(double a, const PolyFit& L, const PolyFit& R, DiscontinuityEvent& ev)>;

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

std::vector<DiscontinuityEvent> scan(const std::vector<double>& x, const std::vector<double>& y,
                                     const std::vector<double>& dy, const DetectOptions& opt,
                                     const Converter& convert) {
  const int n = static_cast<int>(x.size());
  const int w = opt.window;
  const bool hermite = opt.use_slopes && dy.size() == x.size();
  const int degree = hermite ? opt.slope_degree : opt.degree;
  if ((hermite ? 2 * w : w) < degree + 2) throw DomainError("detect: window too small for the fit degree");
  const int needed = std::max(20, 2 * w + 6);
  if (n < needed) {
    std::ostringstream os;
    os << "line has " << n << " samples; at least " << needed
       << " evenly spread samples are needed (and >= 20 per smooth segment)";
    throw ResolutionError(os.str());
  }

  std::vector<GapFit> gaps;
  for (int i = w - 1; i + w < n; ++i) {
    GapFit g;
    g.x_lo = x[static_cast<std::size_t>(i)];
    g.x_hi = x[static_cast<std::size_t>(i + 1)];
    const double c = 0.5 * (g.x_lo + g.x_hi);
    std::span<const double> xl(x.data() + i - w + 1, static_cast<std::size_t>(w));
    std::span<const double> yl(y.data() + i - w + 1, static_cast<std::size_t>(w));
    std::span<const double> xr(x.data() + i + 1, static_cast<std::size_t>(w));
    std::span<const double> yr(y.data() + i + 1, static_cast<std::size_t>(w));
    std::span<const double> dl, dr;
    if (hermite) {
      dl = std::span<const double>(dy.data() + i - w + 1, static_cast<std::size_t>(w));
      dr = std::span<const double>(dy.data() + i + 1, static_cast<std::size_t>(w));
    }
    g.left = PolyFit(xl, yl, dl, degree, c);
    g.right = PolyFit(xr, yr, dr, degree, c);
    // the second derivative is continuous at a; a breakpoint on a sample may sit just outside the gap
    auto d2 = [&](double t) { return g.right.derivative(t, 2) - g.left.derivative(t, 2); };
    const double half = 0.5 * (g.x_hi - g.x_lo);
    const double lo = g.x_lo - half, hi = g.x_hi + half;
    const double f0 = d2(lo), f1 = d2(hi);
    g.a = (f0 > 0) != (f1 > 0) ? find_root(d2, lo, hi, 48) : c;
    g.resid = std::hypot(g.left.rms_residual(), g.right.rms_residual());
    convert(g.a, g.left, g.right, g.ev);
    g.ev.bracket = std::abs(g.x_hi - g.x_lo);
    g.stat = std::abs(g.ev.inferred_jump);
    if (!std::isfinite(g.stat)) g.stat = 0;
    gaps.push_back(std::move(g));
  }

  // global floor: 10x the median statistic over the smoothest quartile
  std::vector<double> stats;
  for (const auto& g : gaps) stats.push_back(g.stat);
  std::vector<double> sorted = stats;
  std::sort(sorted.begin(), sorted.end());
  sorted.resize(std::max<std::size_t>(1, sorted.size() / 4));
  const double global = opt.noise_floor > 0 ? opt.noise_floor : 10 * median(sorted);

  const int m = static_cast<int>(gaps.size());
  std::vector<double> floor(static_cast<std::size_t>(m));
  std::vector<char> flagged(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    double f = global;
    if (opt.noise_floor <= 0) {
      std::vector<double> nb;
      for (int j = std::max(0, i - opt.background); j <= std::min(m - 1, i + opt.background); ++j)
        nb.push_back(stats[static_cast<std::size_t>(j)]);
      f = std::max(f, 10 * median(nb));
    }
    f = std::max(f, opt.min_jump);
    floor[static_cast<std::size_t>(i)] = f;
    flagged[static_cast<std::size_t>(i)] = stats[static_cast<std::size_t>(i)] > f;
  }

  std::vector<DiscontinuityEvent> events;
  for (int i = 0; i < m;) {
    if (!flagged[static_cast<std::size_t>(i)]) {
      ++i;
      continue;
    }
    // flagged gaps closer than one fit window belong to the same event
    int last = i, j = i;
    double min_resid = gaps[static_cast<std::size_t>(i)].resid;
    for (; j < m && j <= last + w; ++j) {
      if (!flagged[static_cast<std::size_t>(j)]) continue;
      last = j;
      min_resid = std::min(min_resid, gaps[static_cast<std::size_t>(j)].resid);
    }
    // among gaps whose fits are both clean, the strongest one
    int best = -1;
    for (int q = i; q <= last; ++q) {
      const auto& g = gaps[static_cast<std::size_t>(q)];
      if (!flagged[static_cast<std::size_t>(q)] || g.resid > 10 * min_resid) continue;
      if (best < 0 || g.stat > gaps[static_cast<std::size_t>(best)].stat) best = q;
    }
    const auto& g = gaps[static_cast<std::size_t>(best)];
    DiscontinuityEvent ev = g.ev;
    ev.confidence = g.stat / std::max(floor[static_cast<std::size_t>(best)], 1e-300);
    events.push_back(ev);
    i = j;
  }
  std::sort(events.begin(), events.end(),
            [](const DiscontinuityEvent& a, const DiscontinuityEvent& b) { return a.location < b.location; });
  return events;
}

Converter energy_converter() {
  // fit variable r, fitted quantity F = r^2 E
  return [](double a, const PolyFit& L, const PolyFit& R, DiscontinuityEvent& ev) {
    const double F = 0.5 * (L(a) + R(a));
    const double dF = 0.5 * (L.derivative(a, 1) + R.derivative(a, 1));
    const double dE = (dF - 2 * F / a) / (a * a);
    const double j3 = (R.derivative(a, 3) - L.derivative(a, 3)) / (a * a);
    ev.location = a;
    ev.slope = dE;
    ev.jump_third = j3;
    ev.inferred_jump = -j3 / (2 * dE);
  };
}

Converter ell_converter() {
  return [](double a, const PolyFit& L, const PolyFit& R, DiscontinuityEvent& ev) {
    const double d1 = 0.5 * (L.derivative(a, 1) + R.derivative(a, 1));
    const double j3 = R.derivative(a, 3) - L.derivative(a, 3);
    ev.location = a;
    ev.slope = d1;
    ev.jump_third = j3;
    ev.inferred_jump = -j3 / (2 * d1);
  };
}

Converter rE_converter() {
  // fit variable E, fitted quantity w = 1/r^2
  return [](double Ea, const PolyFit& L, const PolyFit& R, DiscontinuityEvent& ev) {
    const double w = 0.5 * (L(Ea) + R(Ea));
    const double dw = 0.5 * (L.derivative(Ea, 1) + R.derivative(Ea, 1));
    const double p = std::pow(w, -1.5);
    const double dr = -0.5 * p * dw;
    const double j3 = -0.5 * p * (R.derivative(Ea, 3) - L.derivative(Ea, 3));
    ev.location = 1 / std::sqrt(w);
    ev.slope = dr;
    ev.jump_third = j3;
    // ascending E crosses a from outside in
    ev.inferred_jump = -j3 / (2 * dr * dr * dr);
  };
}

}  // namespace

namespace {

// energy lines are fitted as F = r^2 E, which is exactly quadratic where V is constant near the origin
void fit_data(const InverseLine& line, std::vector<double>& y, std::vector<double>& dy) {
  const bool energy = line.variable == LineVariable::energy;
  const bool slopes = line.exact_slope.size() == line.r.size();
  y.resize(line.r.size());
  dy.clear();
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double r = line.r[i], v = line.value[i];
    y[i] = energy ? r * r * v : v;
    if (slopes) dy.push_back(energy ? 2 * r * v + r * r * line.exact_slope[i] : line.exact_slope[i]);
  }
}

}  // namespace

std::vector<DiscontinuityEvent> detect_discontinuities(const InverseLine& line, const DetectOptions& opt) {
  std::vector<double> y, dy;
  fit_data(line, y, dy);
  return scan(line.r, y, dy, opt, line.variable == LineVariable::energy ? energy_converter() : ell_converter());
}

std::vector<CurvePoint> jump_profile(const InverseLine& line, int window, int degree) {
  std::vector<CurvePoint> out;
  const int n = static_cast<int>(line.r.size());
  const int h = window / 2;
  const bool energy = line.variable == LineVariable::energy;
  std::vector<double> y, dy;
  fit_data(line, y, dy);
  for (int i = h; i + h < n; ++i) {
    const double a = line.r[static_cast<std::size_t>(i)];
    std::span<const double> ds;
    if (!dy.empty()) ds = std::span<const double>(dy.data() + i - h, static_cast<std::size_t>(window));
    PolyFit p(std::span<const double>(line.r.data() + i - h, static_cast<std::size_t>(window)),
              std::span<const double>(y.data() + i - h, static_cast<std::size_t>(window)), ds,
              std::min(ds.empty() ? window - 1 : 2 * window - 1, degree), a);
    double d1, d3;
    if (energy) {
      // E = F / r^2
      const double F = p(a), F1 = p.derivative(a, 1), F2 = p.derivative(a, 2), F3 = p.derivative(a, 3);
      d1 = (F1 - 2 * F / a) / (a * a);
      const double d2 = (F2 - 4 * a * d1 - 2 * F / (a * a)) / (a * a);
      d3 = (F3 - 6 * a * d2 - 6 * d1) / (a * a);
    } else {
      d1 = p.derivative(a, 1);
      d3 = p.derivative(a, 3);
    }
    out.push_back({a, -d3 / (2 * d1)});
  }
  return out;
}

Potential reconstruct_piecewise(const std::vector<DiscontinuityEvent>& events, double min_confidence) {
  std::vector<DiscontinuityEvent> ev(events);
  std::sort(ev.begin(), ev.end(),
            [](const DiscontinuityEvent& a, const DiscontinuityEvent& b) { return a.location < b.location; });
  for (const auto& e : ev) {
    if (e.confidence < min_confidence || !std::isfinite(e.inferred_jump)) {
      std::ostringstream os;
      os << "inconsistent discontinuity at r = " << e.location << " (confidence " << e.confidence << ")";
      throw ReconstructionError(os.str());
    }
  }
  std::vector<double> br, vals(ev.size());
  double outside = 0.0;
  for (std::size_t k = ev.size(); k-- > 0;) {
    vals[k] = outside - ev[k].inferred_jump;
    outside = vals[k];
  }
  for (const auto& e : ev) br.push_back(e.location);
  if (br.empty()) return zero_potential();
  return piecewise(std::move(br), std::move(vals));
}

Potential reconstruct_piecewise(const InverseLine& line, const DetectOptions& opt) {
  return reconstruct_piecewise(detect_discontinuities(line, opt));
}

std::vector<DiscontinuityEvent> detect_discontinuities_rE(const ZeroLine& line, const DetectOptions& opt) {
  if (line.kind != PathKind::fixed_ell) throw DomainError("r(E) reconstruction needs a fixed-l line");
  std::vector<std::tuple<double, double, double>> pts;
  bool slopes = true;
  for (const auto& p : line.points) {
    if (p.diverged || !std::isfinite(p.r)) continue;
    pts.emplace_back(p.E, p.r, p.slope);
    slopes = slopes && std::isfinite(p.slope);
  }
  std::sort(pts.begin(), pts.end());
  // fitted quantity w = 1/r^2 against E
  std::vector<double> E, w, dw;
  for (const auto& [e, r, s] : pts) {
    if (!E.empty() && e <= E.back()) continue;
    E.push_back(e);
    w.push_back(1 / (r * r));
    if (slopes) dw.push_back(-2 * s / (r * r * r));
  }
  return scan(E, w, dw, opt, rE_converter());
}

Potential reconstruct_from_rE_line(const ZeroLine& line, const DetectOptions& opt) {
  return reconstruct_piecewise(detect_discontinuities_rE(line, opt));
}

// ---------------------------------------------------------------------------

JunctionEstimate junction_discontinuity(const ZeroLine& mixed_line, int n, double ell0, double bare_origin_value,
                                        int tail_points) {
  JunctionEstimate j;
  std::vector<std::pair<double, double>> pts;  // (E, r) on the energy branch
  for (const auto& p : mixed_line.points) {
    if (p.diverged || !std::isfinite(p.r)) continue;
    if (mixed_line.kind == PathKind::mixed && p.segment != 1) continue;
    pts.emplace_back(p.E, p.r);
  }
  if (mixed_line.kind == PathKind::mixed) {
    for (const auto& p : mixed_line.points)
      if (p.segment == 1 && p.E == mixed_line.E0) j.r0 = p.r;
  }
  std::sort(pts.begin(), pts.end(), std::greater<>());
  if (static_cast<int>(pts.size()) < std::max(tail_points, 3))
    throw NumericalError("junction_discontinuity: too few points on the energy branch");
  pts.resize(static_cast<std::size_t>(tail_points));

  // d ln r/dE = -1/(2 (E - W)) integrated between neighbours
  std::vector<double> W_fit, W_rnz;
  const double jz = free_regular_zero(ell0, n);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    W_rnz.push_back(pts[i].first - (jz / pts[i].second) * (jz / pts[i].second));
    if (i + 1 < pts.size()) {
      const double rho = (pts[i + 1].second / pts[i].second) * (pts[i + 1].second / pts[i].second);
      W_fit.push_back((rho * pts[i + 1].first - pts[i].first) / (rho - 1));
    }
  }
  j.origin = median(W_fit);
  j.origin_from_zero_constant = median(W_rnz);
  double spread = std::abs(j.origin - j.origin_from_zero_constant);
  for (double w : W_fit) spread = std::max(spread, std::abs(w - j.origin));
  j.residual = spread;
  j.V0 = bare_origin_value;
  j.v = j.origin - bare_origin_value;
  j.reliable = spread <= 1e-4 * (1 + std::abs(j.origin));
  return j;
}

MixedReconstruction reconstruct_mixed(const ZeroLine& mixed_line, const DetectOptions& opt) {
  if (mixed_line.kind != PathKind::mixed) throw DomainError("reconstruct_mixed: need a mixed line");
  MixedReconstruction out;
  const InverseLine inner = invert_line(mixed_line, 1);
  const InverseLine outer = invert_line(mixed_line, 2);
  out.inner_events = detect_discontinuities(inner, opt);
  out.outer_events = detect_discontinuities(outer, opt);
  double total = 0;
  for (const auto& e : out.inner_events) total += e.inferred_jump;
  for (const auto& e : out.outer_events) total += e.inferred_jump;
  const double bare = -total;
  out.junction = junction_discontinuity(mixed_line, mixed_line.n, mixed_line.ell0, bare);
  const double r0 = out.junction.r0;

  std::vector<DiscontinuityEvent> all;
  for (const auto& e : out.inner_events)
    if (e.location < r0) all.push_back(e);
  for (const auto& e : out.outer_events)
    if (e.location > r0) all.push_back(e);
  const double v = out.junction.v;
  if (r0 > 0 && std::abs(v) > std::max(10 * out.junction.residual, 1e-3)) {
    DiscontinuityEvent e;
    e.location = r0;
    e.inferred_jump = -v;  // V(r0+) - V(r0-)
    e.confidence = std::numeric_limits<double>::infinity();
    all.push_back(e);
  }
  out.potential = reconstruct_piecewise(all);
  return out;
}

// ---------------------------------------------------------------------------

UniquenessProbe wronskian_residual(const Potential& pot1, const Potential& pot2, const ZeroLine& line) {
  UniquenessProbe probe;
  std::vector<double> breaks;
  for (double b : pot1.breakpoints()) breaks.push_back(b);
  for (double b : pot2.breakpoints()) breaks.push_back(b);
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());

  double eps = std::numeric_limits<double>::infinity();
  for (const auto& p : line.points)
    if (!p.diverged && std::isfinite(p.r)) eps = std::min(eps, p.r);

  for (const auto& p : line.points) {
    if (p.diverged || !std::isfinite(p.r)) continue;
    const bool energy_branch = line.kind == PathKind::fixed_ell || (line.kind == PathKind::mixed && p.segment == 1);
    ShootOptions opt;
    opt.r_end = p.r;
    opt.record = true;
    opt.energy_derivatives = energy_branch;
    const RegularSolution s1(pot1, p.ell, p.E, opt);
    const RegularSolution s2(pot2, p.ell, p.E, opt);
    const SolutionPoint a = s1.end(), b = s2.end();

    const double direct = a.dpsi * b.psi - a.psi * b.dpsi;
    auto integrand = [&](double x) { return (pot1(x) - pot2(x)) * s1.at(x).psi * s2.at(x).psi; };
    const double quad = integrate_pieces(integrand, 0.0, p.r, breaks, 1e-13);

    probe.E.push_back(p.E);
    probe.ell.push_back(p.ell);
    probe.r.push_back(p.r);
    probe.wronskian_direct.push_back(direct);
    probe.wronskian_quadrature.push_back(quad);
    const double res = std::abs(direct - quad);
    probe.residual.push_back(res);
    probe.max_residual = std::max(probe.max_residual, res);

    if (!energy_branch) {
      probe.kernel_diag.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    // K(r,r) = 2 (dr/dE)^2 psi1' psi2' on the line
    const double drdE = -a.int_psi2 / (a.dpsi * a.dpsi);
    const double K = 2 * drdE * drdE * a.dpsi * b.dpsi;
    probe.kernel_diag.push_back(K);
    // K_r(r, r') = E'(r) d^3/dE^3 [psi1 psi2](r'), E'(r) = 1 / (dr/dE)
    const double dEdr = 1 / drdE;
    for (const auto& q : s1.samples()) {
      if (q.r < eps || q.r > p.r) continue;
      const SolutionPoint u = q, v = s2.at(q.r);
      const double T3 = u.dE[2] * v.psi + 3 * u.dE[1] * v.dE[0] + 3 * u.dE[0] * v.dE[1] + u.psi * v.dE[2];
      const double k1 = std::abs(dEdr * T3 / K);
      if (std::isfinite(k1)) probe.volterra_norm = std::max(probe.volterra_norm, k1);
    }
  }
  return probe;
}

}  // namespace scatter
