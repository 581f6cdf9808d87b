#include "scatter/radial_solver.hpp"

#include "scatter/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace scatter {

namespace {

using Y = std::array<double, 10>;
// layout: psi, psi', int psi^2, int psi^2/r^2, then (u_m, u_m') for m = 1..3, u_m = d^m psi/dE^m

// Dormand-Prince 5(4)
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

struct Stepper {
  const Potential& pot;
  double ell, E, L2;
  int n;  // active components

  void rhs(double r, double V, const Y& y, Y& d) const {
    const double Q = V - E + L2 / (r * r);
    d[0] = y[1];
    d[1] = Q * y[0];
    d[2] = y[0] * y[0];
    d[3] = y[0] * y[0] / (r * r);
    if (n > 4) {
      d[4] = y[5];
      d[5] = Q * y[4] - y[0];
      d[6] = y[7];
      d[7] = Q * y[6] - 2 * y[4];
      d[8] = y[9];
      d[9] = Q * y[8] - 3 * y[6];
    }
  }

  // One step on [r, r+h]; the interval holds no breakpoint in its interior.
  void step(double r, const Y& y, double h, Y& out, Y* err) const {
    const double rh = r + h;
    const double V0 = pot.evaluate(r);
    const double V1 = h > 0 ? pot.left_limit(rh) : V0;
    auto Vat = [&](double c) { return pot.evaluate(r + c * h); };
    Y k1, k2, k3, k4, k5, k6, k7, t;
    rhs(r, V0, y, k1);
    if (h == 0) {
      out = y;
      if (err) err->fill(0);
      return;
    }
    for (int i = 0; i < n; ++i) t[i] = y[i] + h * a21 * k1[i];
    rhs(r + c2 * h, Vat(c2), t, k2);
    for (int i = 0; i < n; ++i) t[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    rhs(r + c3 * h, Vat(c3), t, k3);
    for (int i = 0; i < n; ++i) t[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    rhs(r + c4 * h, Vat(c4), t, k4);
    for (int i = 0; i < n; ++i) t[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    rhs(r + c5 * h, Vat(c5), t, k5);
    for (int i = 0; i < n; ++i)
      t[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    rhs(rh, V1, t, k6);
    for (int i = 0; i < n; ++i)
      out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
    for (int i = n; i < 10; ++i) out[i] = 0;
    if (err) {
      rhs(rh, V1, out, k7);
      for (int i = 0; i < n; ++i)
        (*err)[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
  }

  double wavenumber(double r) const {
    const double Q = pot.left_limit(r) - E + L2 / (r * r);
    return std::sqrt(std::abs(Q) + 1 / (r * r));
  }

  double error_norm(double r, const Y& y0, const Y& y1, const Y& err, double rtol, double atol) const {
    const double q = wavenumber(r);
    double s = 0;
    int cnt = 0;
    auto osc = [&](int i) {
      const double A = std::max(std::hypot(y0[i], y0[i + 1] / q), std::hypot(y1[i], y1[i + 1] / q));
      const double sc = atol + rtol * A;
      const double e0 = err[i] / sc, e1v = err[i + 1] / (q * sc);
      s += e0 * e0 + e1v * e1v;
      cnt += 2;
    };
    auto mono = [&](int i) {
      const double sc = atol + rtol * std::max(std::abs(y0[i]), std::abs(y1[i]));
      const double e = err[i] / sc;
      s += e * e;
      cnt += 1;
    };
    osc(0);
    mono(2);
    mono(3);
    if (n > 4) {
      osc(4);
      osc(6);
      osc(8);
    }
    return std::sqrt(s / cnt);
  }
};

Y to_state(const SolutionPoint& p) {
  return {p.psi, p.dpsi, p.int_psi2, p.int_psi2_r2, p.dE[0], p.dE_dr[0], p.dE[1], p.dE_dr[1], p.dE[2],
          p.dE_dr[2]};
}

SolutionPoint to_point(double r, const Y& y) {
  SolutionPoint p;
  p.r = r;
  p.psi = y[0];
  p.dpsi = y[1];
  p.int_psi2 = y[2];
  p.int_psi2_r2 = y[3];
  p.dE = {y[4], y[6], y[8]};
  p.dE_dr = {y[5], y[7], y[9]};
  return p;
}

// Frobenius series about the origin with V frozen at V(r).
SolutionPoint series_point(const Potential& pot, double ell, double E, double r) {
  const double W = pot.evaluate(r) - E;
  const double d3 = 2 * ell + 3, d5 = 2 * ell + 5, d7 = 2 * ell + 7;
  const double a1 = W / (2 * d3), a2 = W * W / (8 * d3 * d5), a3 = W * W * W / (48 * d3 * d5 * d7);
  const double r2 = r * r;
  const double p = std::pow(r, ell + 1);
  SolutionPoint s;
  s.r = r;
  s.psi = p * (1 + r2 * (a1 + r2 * (a2 + r2 * a3)));
  s.dpsi = p / r * ((ell + 1) + r2 * (a1 * (ell + 3) + r2 * (a2 * (ell + 5) + r2 * a3 * (ell + 7))));
  s.int_psi2 = p * p * r * (1 / d3 + 2 * a1 * r2 / d5);
  s.int_psi2_r2 = p * p / r * (1 / (2 * ell + 1) + 2 * a1 * r2 / d3);
  // energy derivatives of the coefficients (dW/dE = -1)
  const double a1e = -1 / (2 * d3), a2e = -2 * W / (8 * d3 * d5), a3e = -3 * W * W / (48 * d3 * d5 * d7);
  const double a2ee = 2 / (8 * d3 * d5), a3ee = 6 * W / (48 * d3 * d5 * d7);
  const double a3eee = -6 / (48 * d3 * d5 * d7);
  s.dE[0] = p * r2 * (a1e + r2 * (a2e + r2 * a3e));
  s.dE_dr[0] = p / r * r2 * (a1e * (ell + 3) + r2 * (a2e * (ell + 5) + r2 * a3e * (ell + 7)));
  s.dE[1] = p * r2 * r2 * (a2ee + r2 * a3ee);
  s.dE_dr[1] = p / r * r2 * r2 * (a2ee * (ell + 5) + r2 * a3ee * (ell + 7));
  s.dE[2] = p * r2 * r2 * r2 * a3eee;
  s.dE_dr[2] = p / r * r2 * r2 * r2 * a3eee * (ell + 7);
  return s;
}

void require_ell(double ell) {
  if (!(2 * ell + 1 > 0) || !std::isfinite(ell)) throw DomainError("angular momentum must satisfy 2l+1 > 0");
}

}  // namespace

double default_r_start(const Potential& pot, double ell, double E) {
  const double W = std::abs(pot.evaluate(0.0) - E) + 1e-300;
  double r = std::min(1e-3 * pot.support_scale(), 1e-2 * std::sqrt((2 * ell + 3) / W));
  const auto br = pot.breakpoints();
  if (!br.empty()) r = std::min(r, 0.1 * br.front());
  // keep r^(l+1) representable
  const double floor = std::exp(-600.0 / (ell + 1));
  return std::max(r, floor);
}

double default_r_match(const Potential& pot) {
  return std::max(5 * pot.support_scale(), pot.tail_radius(1e-14));
}

RegularSolution::RegularSolution(const Potential& pot, double ell, double E, const ShootOptions& opt,
                                 const SolverConfig& cfg)
    : pot_(pot), ell_(ell), E_(E), opt_(opt), cfg_(cfg) {
  require_ell(ell);
  if (!std::isfinite(E)) throw DomainError("energy must be finite");
  const double r_s = cfg.r_start > 0 ? cfg.r_start : default_r_start(pot_, ell, E);
  if (!(opt.r_end > r_s)) throw DomainError("integration end must exceed the series start radius");
  const Stepper st{pot_, ell, E, ell * (ell + 1), opt.energy_derivatives ? 10 : 4};
  const double max_step = cfg.max_step > 0 ? cfg.max_step : 0.5 * pot_.support_scale();
  const auto br = pot_.breakpoints();

  double r = r_s;
  Y y = to_state(series_point(pot_, ell, E, r));
  if (opt.record) samples_.push_back(to_point(r, y));
  double h = 0.05 * r;
  Y y1, err;

  while (r < opt.r_end) {
    auto it = std::upper_bound(br.begin(), br.end(), r);
    const double next_break = it == br.end() ? std::numeric_limits<double>::infinity() : *it;
    const double target = std::min(opt.r_end, next_break);
    const double hmax = std::min(max_step, target - r);
    bool to_target = false;
    if (h >= hmax) {
      h = hmax;
      to_target = target - r <= max_step;
    }
    st.step(r, y, h, y1, &err);
    const double rn = to_target ? target : r + h;
    const double norm = st.error_norm(rn, y, y1, err, cfg.rel_tol, cfg.abs_tol);
    if (!(norm <= 1.0)) {
      if (!std::isfinite(norm) && !std::isfinite(y1[0])) {
        if (opt.allow_rescale) {
          h *= 0.2;
        } else {
          throw IntegrationError("solution overflowed", r);
        }
      } else {
        h *= std::max(0.2, 0.9 * std::pow(norm, -0.2));
      }
      if (h < 1e-14 * std::max(r, 1e-300)) throw IntegrationError("step size underflow", r);
      continue;
    }

    // zero crossing inside the accepted step
    if ((y[0] != 0.0 && (y[0] > 0) != (y1[0] > 0)) || y1[0] == 0.0) {
      const double hs = rn - r;
      double t;
      if (y1[0] == 0.0) {
        t = hs;
      } else {
        Y tmp;
        t = find_root(
            [&](double s) {
              st.step(r, y, s, tmp, nullptr);
              return tmp[0];
            },
            0.0, hs, 52);
      }
      Y yz;
      st.step(r, y, t, yz, nullptr);
      yz[0] = 0.0;
      zeros_.push_back(to_point(r + t, yz));
      if (opt.stop_after_zeros > 0 && static_cast<int>(zeros_.size()) >= opt.stop_after_zeros) {
        end_ = zeros_.back();
        if (opt.record) samples_.push_back(end_);
        return;
      }
    }

    r = rn;
    y = y1;
    if (opt.record) samples_.push_back(to_point(r, y));
    if (opt.allow_rescale && !opt.record) {
      const double A = std::abs(y[0]) + std::abs(y[1]);
      if (A > 1e100) {
        for (int i : {0, 1, 4, 5, 6, 7, 8, 9}) y[i] /= A;
        y[2] /= A * A;
        y[3] /= A * A;
        log_scale_ += std::log(A);
      }
    }
    h *= std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(norm, 1e-30), -0.2)));
  }
  end_ = to_point(r, y);
}

SolutionPoint RegularSolution::at(double r) const {
  if (samples_.empty()) throw std::logic_error("RegularSolution::at requires recorded samples");
  if (r <= samples_.front().r) return series_point(pot_, ell_, E_, std::max(r, 1e-300));
  if (r > samples_.back().r * (1 + 1e-14)) throw DomainError("radius beyond the integrated range");
  auto it = std::upper_bound(samples_.begin(), samples_.end(), r,
                             [](double v, const SolutionPoint& p) { return v < p.r; });
  const SolutionPoint& s = *(it - 1);
  if (s.r == r) return s;
  const Stepper st{pot_, ell_, E_, ell_ * (ell_ + 1), opt_.energy_derivatives ? 10 : 4};
  Y out;
  st.step(s.r, to_state(s), r - s.r, out, nullptr);
  return to_point(r, out);
}

// ---------------------------------------------------------------------------

RegularSolutionTrace integrate_regular(const Potential& pot, double ell, double E, double r_max,
                                       const SolverConfig& cfg) {
  ShootOptions opt;
  opt.r_end = r_max;
  opt.record = true;
  RegularSolution sol(pot, ell, E, opt, cfg);
  RegularSolutionTrace tr;
  tr.ell = ell;
  tr.energy = E;
  for (const auto& p : sol.samples()) {
    if (!tr.grid.empty() && p.r <= tr.grid.back()) continue;
    tr.grid.push_back(p.r);
    tr.psi.push_back(p.psi);
    tr.dpsi.push_back(p.dpsi);
  }
  for (const auto& z : sol.zeros()) {
    tr.zeros.push_back(z.r);
    tr.zero_slopes.push_back(z.dpsi);
  }
  return tr;
}

namespace {

double local_phase(double ell, double k, const SolutionPoint& p) {
  const RiccatiBessel f = riccati_bessel(ell, k * p.r);
  const double dk = p.dpsi / k;
  const double alpha = p.psi * f.dy - dk * f.y;
  const double beta = f.j * dk - f.dj * p.psi;
  return std::atan(-beta / alpha);
}

double unwrap_to(double prev, double v) {
  return v + std::numbers::pi * std::round((prev - v) / std::numbers::pi);
}

}  // namespace

PhaseShiftSample phase_shift(const Potential& pot, double ell, double k, const SolverConfig& cfg) {
  require_ell(ell);
  if (!(k > 0)) throw DomainError("phase_shift: k must be positive");
  const double rm = cfg.r_match > 0 ? cfg.r_match : default_r_match(pot);
  ShootOptions opt;
  opt.r_end = rm;
  opt.record = true;
  RegularSolution sol(pot, ell, k * k, opt, cfg);
  const auto& s = sol.samples();

  // follow the variable-phase function delta(r) continuously from the origin
  double prev = std::numeric_limits<double>::quiet_NaN();
  double prev_r = 0;
  double at_inner = std::numeric_limits<double>::quiet_NaN();
  const double r_inner = 0.8 * rm;

  auto advance = [&](auto&& self, double r0, double d0, double r1, int depth) -> double {
    const double v = unwrap_to(d0, local_phase(ell, k, sol.at(r1)));
    if (std::abs(v - d0) < std::numbers::pi / 4 || depth > 30) return v;
    const double rmid = 0.5 * (r0 + r1);
    const double dm = self(self, r0, d0, rmid, depth + 1);
    return self(self, rmid, dm, r1, depth + 1);
  };

  for (const auto& p : s) {
    const double raw = local_phase(ell, k, p);
    if (!std::isfinite(raw)) continue;
    double cur;
    if (std::isnan(prev)) {
      cur = raw;
    } else {
      cur = unwrap_to(prev, raw);
      if (std::abs(cur - prev) >= std::numbers::pi / 4) cur = advance(advance, prev_r, prev, p.r, 0);
    }
    if (std::isnan(at_inner) && p.r >= r_inner && !std::isnan(prev)) {
      const double v = advance(advance, prev_r, prev, r_inner, 0);
      at_inner = v;
    }
    prev = cur;
    prev_r = p.r;
  }
  if (std::isnan(prev)) throw NumericalError("phase_shift: matching failed");
  PhaseShiftSample out;
  out.ell = ell;
  out.k = k;
  out.delta = prev;
  out.residual = std::isnan(at_inner) ? 0.0 : std::abs(prev - at_inner);
  return out;
}

// ---------------------------------------------------------------------------

namespace {

// log-derivative of the exterior solution that decays (E < 0) or is r^-l (E = 0)
double decaying_log_derivative(double ell, double E, double r) {
  if (E >= 0) return -ell / r;
  const double kappa = std::sqrt(-E), x = kappa * r, nu = ell + 0.5;
  double ratio;
  if (x < 600) {
    ratio = std::cyl_bessel_k(nu + 1, x) / std::cyl_bessel_k(nu, x);
  } else {
    auto series = [x](double n) {
      const double mu = 4 * n * n;
      return 1 + (mu - 1) / (8 * x) + (mu - 1) * (mu - 9) / (2 * 64 * x * x) +
             (mu - 1) * (mu - 9) * (mu - 25) / (6 * 512 * x * x * x);
    };
    ratio = series(nu + 1) / series(nu);
  }
  return (ell + 1) / r - kappa * ratio;
}

double counting_radius(const Potential& pot) {
  return std::max({pot.tail_radius(1e-14), 2 * pot.support_scale(), 1.0});
}

}  // namespace

int count_nodes_below(const Potential& pot, double ell, double E, const SolverConfig& cfg) {
  require_ell(ell);
  ShootOptions opt;
  opt.r_end = counting_radius(pot);
  opt.allow_rescale = true;
  RegularSolution sol(pot, ell, E, opt, cfg);
  int n = static_cast<int>(sol.zeros().size());
  const auto& e = sol.end();
  if (e.psi == 0.0) return n;
  if (E <= 0 && e.dpsi / e.psi < decaying_log_derivative(ell, E, e.r)) ++n;
  return n;
}

BoundStateSet count_bound_states(const Potential& pot, double ell, const SolverConfig& cfg) {
  BoundStateSet out;
  out.ell = ell;
  const int N = count_nodes_below(pot, ell, 0.0, cfg);
  if (N == 0) return out;
  double lo = pot.lower_bound() - 1;
  while (count_nodes_below(pot, ell, lo, cfg) > 0) lo = 2 * lo - 1;
  for (int j = 1; j <= N; ++j) {
    double a = lo, b = 0.0;
    if (!out.energies.empty()) a = out.energies.back();
    while (b - a > 1e-13 * std::max(1.0, std::abs(a))) {
      const double m = 0.5 * (a + b);
      if (count_nodes_below(pot, ell, m, cfg) >= j)
        b = m;
      else
        a = m;
    }
    out.energies.push_back(0.5 * (a + b));
  }
  return out;
}

}  // namespace scatter
