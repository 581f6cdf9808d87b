#include "scatter/semiclassical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace scatter {

namespace {

constexpr double pi = std::numbers::pi;
// pieces between spline knots are smooth; deep bisection only chases rounding noise
constexpr unsigned knot_depth = 4;

bool ascending(const std::vector<double>& x) {
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1])) return false;
  return true;
}

void check_branch(const std::vector<double>& x, const std::vector<double>& d, const char* name) {
  if (x.size() != d.size()) throw DomainError(std::string(name) + ": column lengths differ");
  if (!ascending(x)) throw DomainError(std::string(name) + ": abscissae must be strictly ascending");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i])) throw DomainError(std::string(name) + ": non-finite phase shift");
    if (i > 0 && std::abs(d[i] - d[i - 1]) > pi / 2) {
      std::ostringstream os;
      os << name << ": phase jumps by more than pi/2 between " << x[i - 1] << " and " << x[i];
      throw DomainError(os.str());
    }
  }
}

// Breakpoints of a spline in x mapped through x = lo * cosh t, restricted to (0, t_max).
std::vector<double> cosh_breaks(std::span<const double> knots, double lo, double t_max) {
  std::vector<double> t;
  for (double x : knots) {
    if (x <= lo) continue;
    const double u = std::acosh(x / lo);
    if (u < t_max) t.push_back(u);
  }
  return t;
}

// Breakpoints of a spline in x mapped through x = k sin(theta) on (0, pi/2).
std::vector<double> sine_breaks(std::span<const double> knots, double k) {
  std::vector<double> t;
  for (double x : knots)
    if (x > 0 && x < k) t.push_back(std::asin(x / k));
  return t;
}

// delta ~ C lambda^-p on the last decade of a branch.
// Decay model beyond the last sample: C x^-p, or C exp(-p x) when that fits the log data better.
struct PowerTail {
  bool fitted = false;
  bool exponential = false;
  double C = 0, p = 0;
  double operator()(double x) const {
    if (!fitted) return 0.0;
    return exponential ? C * std::exp(-p * x) : C * std::pow(x, -p);
  }
  double derivative(double x) const {
    if (!fitted) return 0.0;
    return exponential ? -p * C * std::exp(-p * x) : -p * C * std::pow(x, -p - 1);
  }
};

PowerTail fit_power_tail(const std::vector<double>& x, const std::vector<double>& y) {
  PowerTail t;
  const double top = x.back();
  std::vector<double> xs, lx, ly;
  double sign = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] < top / 2 || x[i] <= 0) continue;
    if (y[i] == 0) return t;
    const double s = y[i] > 0 ? 1.0 : -1.0;
    if (sign == 0) sign = s;
    if (s != sign) return t;
    xs.push_back(x[i]);
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  if (lx.size() < 3) return t;
  // least-squares line ly = a + b u; returns rms residual
  auto line = [&](const std::vector<double>& u, double& a, double& b) {
    const double n = static_cast<double>(u.size());
    double su = 0, sy = 0, suu = 0, suy = 0;
    for (std::size_t i = 0; i < u.size(); ++i) {
      su += u[i];
      sy += ly[i];
      suu += u[i] * u[i];
      suy += u[i] * ly[i];
    }
    const double den = n * suu - su * su;
    if (den <= 0) return std::numeric_limits<double>::infinity();
    b = (n * suy - su * sy) / den;
    a = (sy - b * su) / n;
    double r2 = 0;
    for (std::size_t i = 0; i < u.size(); ++i) r2 += std::pow(ly[i] - a - b * u[i], 2);
    return std::sqrt(r2 / n);
  };
  double ap = 0, bp = 0, ae = 0, be = 0;
  const double rp = line(lx, ap, bp), re = line(xs, ae, be);
  if (!std::isfinite(rp) && !std::isfinite(re)) return t;
  t.exponential = re < rp;
  t.p = t.exponential ? -be : -bp;
  t.C = sign * std::exp(t.exponential ? ae : ap);
  t.fitted = t.p > 0;
  return t;
}

// Integral of f over [a, inf) by u = a / x.
template <class F>
double integrate_to_infinity(F&& f, double a) {
  auto g = [&](double u) {
    if (u <= 0) return 0.0;
    const double x = a / u;
    return f(x) * a / (u * u);
  };
  return integrate(g, 0.0, 1.0, 1e-10);
}

CubicSpline interpolant(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 4) throw DomainError("need at least four samples to build a spline");
  return CubicSpline(x, y);
}

bool is_zero_series(const std::vector<double>& v) {
  return std::all_of(v.begin(), v.end(), [](double d) { return d == 0.0; });
}

}  // namespace

void PhaseShiftTable::validate() const {
  if (!(k0 > 0)) throw DomainError("phase table: k0 must be positive");
  if (!(lambda0() > 0)) throw DomainError("phase table: need l0 > -1/2");
  check_branch(k, delta_k, "fixed-l branch");
  check_branch(lambda, delta_lambda, "fixed-energy branch");
  if (!k.empty() && k.front() < k0 * (1 - 1e-12)) throw DomainError("fixed-l branch starts below k0");
  if (!lambda.empty() && lambda.front() < lambda0() * (1 - 1e-12))
    throw DomainError("fixed-energy branch starts below lambda0");
}

double TurningPointCurve::free_radius(std::size_t i) const {
  return parameter == CurveParameter::lambda ? param[i] / anchor : anchor / param[i];
}

std::vector<double> TurningPointCurve::potential() const {
  std::vector<double> V(param.size());
  for (std::size_t i = 0; i < param.size(); ++i) {
    const double k = parameter == CurveParameter::lambda ? anchor : param[i];
    const double lam = parameter == CurveParameter::lambda ? param[i] : anchor;
    V[i] = k * k - (lam / radius[i]) * (lam / radius[i]);
  }
  return V;
}

// ---------------------------------------------------------------------------

double turning_point(const Potential& pot, double lambda, double k) {
  if (!(k > 0)) throw DomainError("turning_point: k must be positive");
  if (lambda <= 0) return 0.0;
  auto f = [&](double r) { return k * k - pot(r) - (lambda / r) * (lambda / r); };
  // f < 0 below r_lo for any V; f > 0 beyond r_hi once V has died out
  const double r_lo = 0.999 * lambda / std::sqrt(k * k - std::min(pot.lower_bound(), 0.0));
  const double vmax = std::max(pot.upper_bound(), 0.0);
  double r_hi = k * k > vmax ? 1.001 * lambda / std::sqrt(k * k - vmax)
                             : std::max(2 * lambda / k, pot.tail_radius(1e-14));
  r_hi = std::max(r_hi, 2 * r_lo);
  while (f(r_hi) <= 0) {
    r_hi *= 2;
    if (r_hi > 1e8 * (lambda / k)) throw NumericalError("turning_point: no classically allowed region");
  }

  std::vector<double> grid;
  const int m = 4000;
  for (int i = 0; i <= m; ++i) grid.push_back(r_lo * std::pow(r_hi / r_lo, static_cast<double>(i) / m));
  for (double b : pot.breakpoints())
    if (b > r_lo && b < r_hi) grid.push_back(b);
  std::sort(grid.begin(), grid.end());

  std::vector<std::pair<double, double>> brackets;
  double prev = f(grid.front());
  for (std::size_t i = 1; i < grid.size(); ++i) {
    const double cur = f(grid[i]);
    if ((prev > 0) != (cur > 0)) brackets.emplace_back(grid[i - 1], grid[i]);
    prev = cur;
  }
  if (brackets.size() != 1) {
    std::ostringstream os;
    os << "turning point is not unique for lambda = " << lambda << ", k = " << k << ":";
    for (const auto& [a, b] : brackets) os << " [" << a << ", " << b << "]";
    throw TurningPointError(os.str(), brackets);
  }
  return find_root(f, brackets[0].first, brackets[0].second, 53);
}

double jwkb_phase_shift(const Potential& pot, double lambda, double k) {
  const double rt = turning_point(pot, lambda, k);
  const double rf = lambda / k;
  const double R = std::max({2 * rt, 2 * rf, rt + pot.support_scale(), pot.tail_radius(1e-15)});
  auto K = [&](double r) {
    const double v = k * k - pot(r) - (r > 0 ? (lambda / r) * (lambda / r) : 0.0);
    return v > 0 ? std::sqrt(v) : 0.0;
  };
  // r = rt + s^2 removes the square-root behaviour at the turning point
  auto integrand = [&](double s) { return 2 * s * K(rt + s * s); };
  std::vector<double> sb;
  for (double b : pot.breakpoints())
    if (b > rt && b < R) sb.push_back(std::sqrt(b - rt));
  const double inner = integrate_pieces(integrand, 0.0, std::sqrt(R - rt), sb, 1e-13);
  const double kR = k * R;
  const double free = std::sqrt(std::max(0.0, kR * kR - lambda * lambda)) - (lambda > 0 ? lambda * std::acos(lambda / kR) : 0.0);
  return inner - free;
}

// ---------------------------------------------------------------------------

double sabatier_forward(const std::function<double(double)>& log_ratio, double lambda, double lambda_max) {
  if (!(lambda > 0)) throw DomainError("sabatier_forward: lambda must be positive");
  if (lambda >= lambda_max) return 0.0;
  // integration by parts and lambda' = lambda cosh t
  const double T = std::acosh(lambda_max / lambda);
  auto f = [&](double t) { return std::cosh(t) * log_ratio(lambda * std::cosh(t)); };
  return -lambda * integrate(f, 0.0, T, 1e-12);
}

PhaseSamples sabatier_forward(const TurningPointCurve& curve) {
  if (curve.parameter != CurveParameter::lambda) throw DomainError("sabatier_forward: need a lambda curve");
  std::vector<double> y(curve.param.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(curve.radius[i] / curve.free_radius(i));
  PhaseSamples out;
  out.x = curve.param;
  if (is_zero_series(y)) {
    out.delta.assign(y.size(), 0.0);
    return out;
  }
  const CubicSpline S = interpolant(curve.param, y);
  const PowerTail tail = fit_power_tail(curve.param, y);
  const double top = curve.param.back();
  if (tail.fitted && !tail.exponential && tail.p <= 1) throw NumericalError("sabatier_forward: lambda d/dlambda ln(r/r_free) is not integrable");
  for (double lam : curve.param) {
    const double T = lam < top ? std::acosh(top / lam) : 0.0;
    auto f = [&](double t) { return std::cosh(t) * S(lam * std::cosh(t)); };
    const auto br = cosh_breaks(S.knots(), lam, T);
    double d = -lam * integrate_pieces(f, 0.0, T, br, 1e-12, nullptr, knot_depth);
    double tail_part = 0;
    if (tail.fitted)
      tail_part = -integrate_to_infinity(
          [&](double x) { return x / std::sqrt(x * x - lam * lam) * tail(x); }, std::max(top, lam * (1 + 1e-9)));
    d += tail_part;
    out.truncation_error = std::max(out.truncation_error, std::abs(tail_part));
    out.delta.push_back(d);
  }
  return out;
}

TurningPointCurve abel_invert_fixed_energy(const PhaseShiftTable& table) {
  table.validate();
  const auto& lam = table.lambda;
  TurningPointCurve c;
  c.parameter = CurveParameter::lambda;
  c.anchor = table.k0;
  c.param = lam;
  if (is_zero_series(table.delta_lambda)) {
    for (double l : lam) c.radius.push_back(l / table.k0);
    return c;
  }
  const SmoothingResult sm = smoothing_spline_gcv(lam, table.delta_lambda);
  const CubicSpline& S = sm.spline;
  const double top = lam.back();
  const PowerTail tail = fit_power_tail(lam, table.delta_lambda);
  double ymax = 0;
  std::vector<double> y;
  for (double l : lam) {
    const double T = l < top ? std::acosh(top / l) : 0.0;
    auto f = [&](double t) { return S.derivative(l * std::cosh(t)); };
    double v = integrate_pieces(f, 0.0, T, cosh_breaks(S.knots(), l, T), 1e-12, nullptr, knot_depth);
    double tail_part;
    if (tail.fitted) {
      tail_part = integrate_to_infinity(
          [&](double x) { return tail.derivative(x) / std::sqrt(x * x - l * l); }, std::max(top, l * (1 + 1e-9)));
      v += tail_part;
    } else {
      // bound on the neglected tail for a monotone phase beyond the data
      tail_part = l < top ? std::abs(table.delta_lambda.back()) / std::sqrt(top * top - l * l) : 0.0;
    }
    v *= 2 / pi;
    tail_part *= 2 / pi;
    if (l < top) c.truncation_error = std::max(c.truncation_error, std::abs(tail_part));
    ymax = std::max(ymax, std::abs(v));
    y.push_back(v);
  }
  // y = ln(r / r_free), so an absolute floor bounds the relative radius error
  if (!tail.fitted && c.truncation_error > std::max(0.1 * ymax, 1e-9)) {
    std::ostringstream os;
    os << "fixed-energy branch too short for a tail fit; truncation error " << c.truncation_error
       << " exceeds 10% of the result";
    throw NumericalError(os.str());
  }
  for (std::size_t i = 0; i < lam.size(); ++i) {
    c.radius.push_back(lam[i] / table.k0 * std::exp(y[i]));
    if (i > 0 && !(c.radius[i] > c.radius[i - 1])) c.monotone = false;
  }
  return c;
}

PhaseSamples fixed_l_forward(const TurningPointCurve& curve) {
  if (curve.parameter != CurveParameter::k) throw DomainError("fixed_l_forward: need a k curve");
  std::vector<double> k, f;
  if (curve.param.front() > 0) {
    k.push_back(0.0);
    f.push_back(0.0);
  }
  for (std::size_t i = 0; i < curve.param.size(); ++i) {
    k.push_back(curve.param[i]);
    f.push_back(curve.param[i] > 0 ? curve.radius[i] - curve.free_radius(i) : 0.0);
  }
  PhaseSamples out;
  out.x = curve.param;
  const CubicSpline S = interpolant(k, f);
  for (double kk : curve.param) {
    if (kk <= 0) {
      out.delta.push_back(0.0);
      continue;
    }
    // k' = k sin(theta)
    auto g = [&](double th) { return std::sin(th) * S(kk * std::sin(th)); };
    out.delta.push_back(-kk * integrate_pieces(g, 0.0, pi / 2, sine_breaks(S.knots(), kk), 1e-12, nullptr, knot_depth));
  }
  return out;
}

TurningPointCurve abel_invert_fixed_l(const PhaseShiftTable& table, const PhaseSamples& low_k) {
  table.validate();
  if (low_k.x.empty()) throw DomainError("fixed-l inversion needs delta(l0, k) on [0, k0)");
  std::vector<double> k, d;
  for (std::size_t i = 0; i < low_k.x.size(); ++i) {
    if (low_k.x[i] >= table.k.front()) break;
    k.push_back(low_k.x[i]);
    d.push_back(low_k.delta[i]);
  }
  if (k.front() > 0) {
    k.insert(k.begin(), 0.0);
    d.insert(d.begin(), 0.0);
  }
  k.insert(k.end(), table.k.begin(), table.k.end());
  d.insert(d.end(), table.delta_k.begin(), table.delta_k.end());
  if (!ascending(k)) throw DomainError("fixed-l inversion: low-k samples overlap the branch");

  TurningPointCurve c;
  c.parameter = CurveParameter::k;
  c.anchor = table.lambda0();
  c.param = table.k;
  const bool zero = is_zero_series(d);
  CubicSpline S;
  if (!zero) S = smoothing_spline_gcv(k, d).spline;
  for (double kk : table.k) {
    double f = 0;
    if (!zero) {
      // k' = k sin(theta); the JWKB phase gives r - r_free = -(2/pi) int delta'(k') / sqrt(k^2 - k'^2)
      auto g = [&](double th) { return S.derivative(kk * std::sin(th)); };
      f = -2 / pi * integrate_pieces(g, 0.0, pi / 2, sine_breaks(S.knots(), kk), 1e-12, nullptr, knot_depth);
    }
    c.radius.push_back(c.anchor / kk + f);
  }
  for (std::size_t i = 1; i < c.radius.size(); ++i)
    if (!(c.radius[i] < c.radius[i - 1])) c.monotone = false;
  return c;
}

PhaseSamples reconstruct_low_k_phase(const TurningPointCurve& curve, double lambda0, const std::vector<double>& ks) {
  if (curve.parameter != CurveParameter::lambda) throw DomainError("reconstruct_low_k_phase: need a lambda curve");
  const double k0 = curve.anchor;
  const auto& lam = curve.param;
  std::vector<double> y(lam.size());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(curve.radius[i] / curve.free_radius(i));
  const bool zero = is_zero_series(y);
  CubicSpline S;
  if (!zero) S = interpolant(lam, y);
  const double top = lam.back();
  double ymax = 0;
  for (double v : y) ymax = std::max(ymax, std::abs(v));
  const bool free_beyond = std::abs(y.back()) <= 1e-6 * std::max(ymax, 1e-300);

  // beyond the data the turning points are taken as free
  auto logr = [&](double l) { return zero || l >= top ? 0.0 : S(l); };
  auto dlogr = [&](double l) { return zero || l >= top ? 0.0 : S.derivative(l); };
  auto r = [&](double l) { return l / k0 * std::exp(logr(l)); };
  auto dr = [&](double l) { return r(l) * (1 / l + dlogr(l)); };

  PhaseSamples out;
  out.x = ks;
  const double c = k0 * lambda0;
  for (double k : ks) {
    if (k < 0 || k > k0 * (1 + 1e-12)) throw DomainError("reconstruct_low_k_phase: need 0 <= k <= k0");
    if (k == 0) {
      out.delta.push_back(0.0);
      continue;
    }
    auto g = [&](double l) {
      const double rl = r(l);
      return k * k - k0 * k0 + (l * l - lambda0 * lambda0) / (rl * rl);
    };
    const double U = std::max(top, c / k);
    double lk;
    if (g(lambda0) >= 0) {
      lk = lambda0;
    } else if (g(top) >= 0) {
      lk = find_root(g, lambda0, top, 52);
    } else {
      if (!free_beyond) {
        std::ostringstream os;
        os << "turning point for k = " << k << " lies beyond the fixed-energy data; need lambda_max >= " << c / k;
        throw NumericalError(os.str());
      }
      lk = c / k;
    }
    // lambda = lk + s^2
    auto f = [&](double s) {
      const double l = lk + s * s;
      const double v = g(l);
      return 2 * s * (v > 0 ? std::sqrt(v) : 0.0) * dr(l);
    };
    std::vector<double> sb;
    for (double x : lam)
      if (x > lk && x < U) sb.push_back(std::sqrt(x - lk));
    const double I1 = integrate_pieces(f, 0.0, std::sqrt(U - lk), sb, 1e-13, nullptr, knot_depth);
    const double kU = k * U;
    const double I2 = (std::sqrt(std::max(0.0, kU * kU - c * c)) - (c > 0 ? c * std::acos(std::min(1.0, c / kU)) : 0.0)) / k0;
    out.delta.push_back(I1 - I2);
  }
  return out;
}

JwkbReconstruction mixed_jwkb_invert(const PhaseShiftTable& table, int low_k_points) {
  try {
    table.validate();
  } catch (const std::exception& e) {
    throw StageError("table", e.what());
  }
  if (table.k.empty() || table.lambda.empty()) throw StageError("table", "both branches are required");
  JwkbReconstruction out;
  try {
    out.outer = abel_invert_fixed_energy(table);
  } catch (const std::exception& e) {
    throw StageError("fixed-energy inversion", e.what());
  }
  try {
    std::vector<double> ks;
    for (int j = 0; j < low_k_points; ++j) ks.push_back(table.k0 * j / low_k_points);
    out.low_k = reconstruct_low_k_phase(out.outer, table.lambda0(), ks);
  } catch (const std::exception& e) {
    throw StageError("low-k completion", e.what());
  }
  try {
    out.inner = abel_invert_fixed_l(table, out.low_k);
  } catch (const std::exception& e) {
    throw StageError("fixed-l inversion", e.what());
  }

  if (!out.outer.monotone || !out.inner.monotone)
    throw StageError("stitch", "turning points are not monotone; the single-turning-point hypothesis fails");
  const auto Vo = out.outer.potential();
  const auto Vi = out.inner.potential();
  out.r0 = out.outer.radius.front();
  out.seam_radius_mismatch = std::abs(out.inner.radius.front() - out.r0);
  out.seam_residual = std::abs(Vo.front() - Vi.front());

  std::vector<double> r, V;
  for (std::size_t i = out.inner.radius.size(); i-- > 0;) {
    if (out.inner.radius[i] >= out.r0) continue;
    if (!r.empty() && out.inner.radius[i] <= r.back()) continue;
    r.push_back(out.inner.radius[i]);
    V.push_back(Vi[i]);
  }
  for (std::size_t i = 0; i < out.outer.radius.size(); ++i) {
    if (!r.empty() && out.outer.radius[i] <= r.back()) continue;
    r.push_back(out.outer.radius[i]);
    V.push_back(Vo[i]);
  }
  out.potential = tabulated(std::move(r), std::move(V));
  return out;
}

PhaseShiftTable jwkb_phase_table(const Potential& pot, double ell0, double k0, const std::vector<double>& k,
                                 const std::vector<double>& lambda) {
  PhaseShiftTable t;
  t.ell0 = ell0;
  t.k0 = k0;
  t.k = k;
  t.lambda = lambda;
  for (double kk : k) t.delta_k.push_back(jwkb_phase_shift(pot, t.lambda0(), kk));
  for (double l : lambda) t.delta_lambda.push_back(jwkb_phase_shift(pot, l, k0));
  return t;
}

// ---------------------------------------------------------------------------

namespace {

// Integral of f(r) w(q r) over r > 0 split at breakpoints and at the zeros of sin(q r);
// beyond the support the half-period sums are averaged until they settle.
template <class F>
double oscillatory_integral(const Potential& pot, double q, F&& f) {
  double Rc = pot.tail_radius(1e-15);
  if (!pot.breakpoints().empty()) Rc = std::max(Rc, pot.breakpoints().back());
  std::vector<double> br(pot.breakpoints().begin(), pot.breakpoints().end());
  const double half = q > 0 ? pi / q : Rc;
  for (double x = half; x < Rc; x += half) br.push_back(x);
  std::sort(br.begin(), br.end());
  double total = integrate_pieces(f, 0.0, Rc, br, 1e-12);
  if (pot.is_zero() || q <= 0) return total;

  // tail beyond Rc
  double a = Rc;
  std::vector<double> partial;
  const int max_terms = 1000;
  for (int i = 0; i < max_terms; ++i) {
    double b = (std::floor(a / half) + 1) * half;
    if (b < a + 0.5 * half) b += half;
    const double term = integrate(f, a, b, 1e-10);
    total += term;
    partial.push_back(total);
    if (std::abs(term) <= 1e-16 * (1 + std::abs(total))) return total;
    a = b;
  }
  // alternating half periods: the mean of the last two partial sums
  return 0.5 * (partial[partial.size() - 1] + partial[partial.size() - 2]);
}

}  // namespace

BornTransform born_g_from_potential(const Potential& pot, const std::vector<double>& q) {
  BornTransform t;
  t.q = q;
  t.source = BornSource::from_potential;
  for (double qq : q) {
    if (qq == 0 || pot.is_zero()) {
      t.g.push_back(0.0);
      continue;
    }
    t.g.push_back(oscillatory_integral(pot, qq, [&](double r) { return std::sin(qq * r) * r * pot(r); }));
  }
  return t;
}

double born_phase_shift(const Potential& pot, double k) {
  if (!(k > 0)) throw DomainError("born_phase_shift: k must be positive");
  if (pot.is_zero()) return 0.0;
  const double I = oscillatory_integral(pot, 2 * k, [&](double r) {
    const double s = std::sin(k * r);
    return s * s * pot(r);
  });
  return -I / k;
}

std::vector<double> born_invert_rV(const BornTransform& t, const std::vector<double>& radii,
                                   const BornInvertOptions& opt) {
  if (t.q.size() != t.g.size()) throw DomainError("born transform: column lengths differ");
  std::vector<double> q = t.q, g = t.g;
  if (!ascending(q)) throw DomainError("born transform: q must be strictly ascending");
  if (q.empty() || q.front() > 0) {
    q.insert(q.begin(), 0.0);
    g.insert(g.begin(), 0.0);
  }
  std::vector<double> out(radii.size(), 0.0);
  if (is_zero_series(g)) return out;
  const CubicSpline G = interpolant(q, g);
  const double Q = q.back(), Q1 = opt.taper_start * Q;
  auto w = [&](double x) { return x <= Q1 ? 1.0 : 0.5 * (1 + std::cos(pi * (x - Q1) / (Q - Q1))); };
  std::vector<double> br(q.begin(), q.end());
  br.push_back(Q1);
  std::sort(br.begin(), br.end());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    if (r <= 0) continue;
    auto f = [&](double x) { return std::sin(x * r) * G(x) * w(x); };
    out[i] = 2 / pi * integrate_pieces(f, 0.0, Q, br, 1e-10, nullptr, knot_depth);
  }
  return out;
}

BornReconstruction born_extend_and_invert(const BornTransform& fixed_energy, const std::vector<double>& k,
                                          const std::vector<double>& delta0, const std::vector<double>& radii,
                                          const BornInvertOptions& opt) {
  if (k.size() != delta0.size()) throw DomainError("born: k and delta columns differ in length");
  BornReconstruction out;
  BornTransform& t = out.transform;
  if (k.empty()) {
    t = fixed_energy;
  } else {
    if (!ascending(k)) throw DomainError("born: k must be strictly ascending");
    const double k0 = k.front();
    out.q_seam = 2 * k0;
    t.source = BornSource::extended_by_fixed_l_data;
    for (std::size_t i = 0; i < fixed_energy.q.size(); ++i) {
      if (fixed_energy.q[i] > out.q_seam * (1 + 1e-12)) break;
      t.q.push_back(fixed_energy.q[i]);
      t.g.push_back(fixed_energy.g[i]);
    }
    std::vector<double> kd(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) kd[i] = k[i] * delta0[i];
    const CubicSpline S = is_zero_series(kd) ? CubicSpline() : smoothing_spline_gcv(k, kd).spline;
    auto g_ext = [&](double kk) { return S.empty() ? 0.0 : -S.derivative(kk); };
    if (!t.q.empty()) {
      const double g_left = t.q.size() >= 4 && t.q.back() < out.q_seam ? interpolant(t.q, t.g)(out.q_seam) : t.g.back();
      out.seam_mismatch = std::abs(g_left - g_ext(k0));
    }
    for (double kk : k) {
      const double qq = 2 * kk;
      if (!t.q.empty() && qq <= t.q.back()) continue;
      t.q.push_back(qq);
      t.g.push_back(g_ext(kk));
    }
  }
  out.r = radii;
  out.rV = born_invert_rV(t, radii, opt);
  std::vector<double> r, V;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (radii[i] <= 0 || (!r.empty() && radii[i] <= r.back())) continue;
    r.push_back(radii[i]);
    V.push_back(out.rV[i] / radii[i]);
  }
  out.potential = r.empty() ? zero_potential() : tabulated(std::move(r), std::move(V));
  return out;
}

}  // namespace scatter
