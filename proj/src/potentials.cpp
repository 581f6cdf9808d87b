#include "scatter/potentials.hpp"

#include "scatter/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace scatter {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double bargmann_value(const BargmannForm& b, double r) {
  const double k = b.kappa, c = b.c;
  const double s = std::exp(-2 * k * r);
  const double one_minus_s = -std::expm1(-2 * k * r);
  const double one_minus_s2 = -std::expm1(-4 * k * r);
  const double Fs = s + c * (one_minus_s2 / (8 * k) - r * s / 2);
  const double Ns = c * k * one_minus_s2 / 2 + c * c * one_minus_s * one_minus_s / 4 -
                    c * c * k * r * one_minus_s2 / 4;
  return -2 * Ns * s / (Fs * Fs);
}

double tabulated_value(const TabulatedForm& t, double r, bool left) {
  const auto& x = t.r;
  if (r < x.front()) return t.V.front();
  if (r > x.back() || (r == x.back() && !left)) return 0.0;
  if (x.size() == 1) return t.V.front();
  auto it = std::upper_bound(x.begin(), x.end(), r);
  std::size_t i = static_cast<std::size_t>(it - x.begin());
  if (i >= x.size()) i = x.size() - 1;
  if (i == 0) i = 1;
  const double w = (r - x[i - 1]) / (x[i] - x[i - 1]);
  return (1 - w) * t.V[i - 1] + w * t.V[i];
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + " must be finite");
}

std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  os << '[';
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ']';
  return os.str();
}

}  // namespace

Potential::Potential(Form form) : form_(std::move(form)) {
  std::visit(overloaded{
                 [&](const ZeroForm&) { scale_ = 1; },
                 [&](const PiecewiseForm& p) {
                   if (p.breakpoints.size() != p.values.size())
                     throw DomainError("piecewise: breakpoints and values differ in length");
                   for (std::size_t i = 0; i < p.breakpoints.size(); ++i) {
                     check_finite(p.breakpoints[i], "piecewise breakpoint");
                     check_finite(p.values[i], "piecewise value");
                     if (p.breakpoints[i] <= (i ? p.breakpoints[i - 1] : 0.0))
                       throw DomainError("piecewise: breakpoints must be positive and increasing");
                   }
                   breaks_ = p.breakpoints;
                   scale_ = breaks_.empty() ? 1.0 : breaks_.back();
                   for (double v : p.values) {
                     vmin_ = std::min(vmin_, v);
                     vmax_ = std::max(vmax_, v);
                   }
                 },
                 [&](const SquareWellForm& s) {
                   check_finite(s.V0, "square_well V0");
                   if (!(s.a > 0) || !std::isfinite(s.a)) throw DomainError("square_well: a must be positive");
                   breaks_ = {s.a};
                   scale_ = s.a;
                   vmin_ = std::min(0.0, -s.V0);
                   vmax_ = std::max(0.0, -s.V0);
                 },
                 [&](const ExponentialForm& e) {
                   check_finite(e.A, "exponential A");
                   if (!(e.mu > 0) || !std::isfinite(e.mu)) throw DomainError("exponential: mu must be positive");
                   scale_ = 1 / e.mu;
                   vmin_ = std::min(0.0, e.A);
                   vmax_ = std::max(0.0, e.A);
                 },
                 [&](const GaussianForm& g) {
                   check_finite(g.A, "gaussian A");
                   if (!(g.sigma > 0) || !std::isfinite(g.sigma))
                     throw DomainError("gaussian: sigma must be positive");
                   scale_ = g.sigma;
                   vmin_ = std::min(0.0, g.A);
                   vmax_ = std::max(0.0, g.A);
                 },
                 [&](const BargmannForm& b) {
                   if (!(b.kappa > 0) || !std::isfinite(b.kappa))
                     throw DomainError("bargmann: kappa must be positive");
                   if (!(b.c > 0) || !std::isfinite(b.c)) throw DomainError("bargmann: c must be positive");
                   scale_ = 1 / b.kappa;
                 },
                 [&](const TabulatedForm& t) {
                   if (t.r.empty() || t.r.size() != t.V.size())
                     throw DomainError("tabulated: need matching, non-empty r and V samples");
                   if (!(t.r.front() >= 0)) throw DomainError("tabulated: first radius must be >= 0");
                   for (std::size_t i = 0; i < t.r.size(); ++i) {
                     check_finite(t.r[i], "tabulated radius");
                     check_finite(t.V[i], "tabulated value");
                     if (i && !(t.r[i] > t.r[i - 1]))
                       throw DomainError("tabulated: radii must be strictly increasing");
                   }
                   for (double x : t.r)
                     if (x > 0) breaks_.push_back(x);
                   scale_ = std::max(t.r.back(), 1e-300);
                   for (double v : t.V) {
                     vmin_ = std::min(vmin_, v);
                     vmax_ = std::max(vmax_, v);
                   }
                 },
                 [&](const FunctionForm& f) {
                   if (!f.f) throw DomainError("function potential: empty callable");
                   if (!(f.scale > 0)) throw DomainError("function potential: scale must be positive");
                   scale_ = f.scale;
                 },
             },
             form_);

  if (std::holds_alternative<BargmannForm>(form_) || std::holds_alternative<FunctionForm>(form_)) {
    const double hi = std::holds_alternative<BargmannForm>(form_) ? tail_radius(1e-14) : 20 * scale_;
    const double lo = std::holds_alternative<BargmannForm>(form_) ? 0.0 : 1e-3 * scale_;
    for (int i = 0; i <= 4000; ++i) {
      const double v = evaluate(lo + (hi - lo) * i / 4000.0);
      if (!std::isfinite(v)) continue;
      vmin_ = std::min(vmin_, v);
      vmax_ = std::max(vmax_, v);
    }
  }
}

double Potential::evaluate(double r) const {
  if (!(r >= 0)) throw DomainError("potential evaluated at negative radius");
  return std::visit(
      overloaded{
          [](const ZeroForm&) { return 0.0; },
          [&](const PiecewiseForm& p) {
            const auto i = static_cast<std::size_t>(
                std::upper_bound(p.breakpoints.begin(), p.breakpoints.end(), r) - p.breakpoints.begin());
            return i < p.values.size() ? p.values[i] : 0.0;
          },
          [&](const SquareWellForm& s) { return r < s.a ? -s.V0 : 0.0; },
          [&](const ExponentialForm& e) { return e.A * std::exp(-e.mu * r); },
          [&](const GaussianForm& g) {
            const double x = r / g.sigma;
            return g.A * std::exp(-x * x);
          },
          [&](const BargmannForm& b) { return bargmann_value(b, r); },
          [&](const TabulatedForm& t) { return tabulated_value(t, r, false); },
          [&](const FunctionForm& f) { return f.f(r); },
      },
      form_);
}

double Potential::left_limit(double r) const {
  if (!(r >= 0)) throw DomainError("potential evaluated at negative radius");
  if (const auto* p = std::get_if<PiecewiseForm>(&form_)) {
    const auto i = static_cast<std::size_t>(
        std::lower_bound(p->breakpoints.begin(), p->breakpoints.end(), r) - p->breakpoints.begin());
    return i < p->values.size() ? p->values[i] : 0.0;
  }
  if (const auto* s = std::get_if<SquareWellForm>(&form_)) return r <= s->a ? -s->V0 : 0.0;
  if (const auto* t = std::get_if<TabulatedForm>(&form_)) return tabulated_value(*t, r, true);
  return evaluate(r);
}

double Potential::tail_radius(double eps) const {
  return std::visit(
      overloaded{
          [](const ZeroForm&) { return 0.0; },
          [&](const PiecewiseForm&) { return breaks_.empty() ? 0.0 : breaks_.back(); },
          [&](const SquareWellForm& s) { return s.a; },
          [&](const ExponentialForm& e) {
            return std::abs(e.A) > eps ? std::log(std::abs(e.A) / eps) / e.mu : 0.0;
          },
          [&](const GaussianForm& g) {
            return std::abs(g.A) > eps ? g.sigma * std::sqrt(std::log(std::abs(g.A) / eps)) : 0.0;
          },
          [&](const BargmannForm& b) {
            // asymptotically V ~ 32 kappa^3 r exp(-2 kappa r)
            double r = 1 / b.kappa;
            for (int i = 0; i < 60; ++i)
              r = std::max(1 / b.kappa, std::log(32 * b.kappa * b.kappa * b.kappa * r / eps) / (2 * b.kappa));
            const double hi = r + 10 / b.kappa, h = 0.01 / b.kappa;
            for (double x = hi; x > 0; x -= h)
              if (std::abs(bargmann_value(b, x)) > eps) return x + h;
            return 0.0;
          },
          [&](const TabulatedForm& t) { return t.r.back(); },
          [&](const FunctionForm& f) {
            const double h = 0.01 * f.scale;
            for (double x = 50 * f.scale; x > 0; x -= h)
              if (!(std::abs(f.f(x)) <= eps)) return x + h;
            return 0.0;
          },
      },
      form_);
}

bool Potential::is_zero() const {
  return std::visit(overloaded{
                        [](const ZeroForm&) { return true; },
                        [](const PiecewiseForm& p) {
                          return std::all_of(p.values.begin(), p.values.end(), [](double v) { return v == 0; });
                        },
                        [](const SquareWellForm& s) { return s.V0 == 0; },
                        [](const ExponentialForm& e) { return e.A == 0; },
                        [](const GaussianForm& g) { return g.A == 0; },
                        [](const BargmannForm&) { return false; },
                        [](const TabulatedForm& t) {
                          return std::all_of(t.V.begin(), t.V.end(), [](double v) { return v == 0; });
                        },
                        [](const FunctionForm&) { return false; },
                    },
                    form_);
}

std::string Potential::describe() const {
  std::ostringstream os;
  os.precision(17);
  std::visit(overloaded{
                 [&](const ZeroForm&) { os << "zero"; },
                 [&](const PiecewiseForm& p) {
                   os << "piecewise(breakpoints=" << join(p.breakpoints) << ", values=" << join(p.values) << ")";
                 },
                 [&](const SquareWellForm& s) { os << "square_well(V0=" << s.V0 << ", a=" << s.a << ")"; },
                 [&](const ExponentialForm& e) { os << "exponential(A=" << e.A << ", mu=" << e.mu << ")"; },
                 [&](const GaussianForm& g) { os << "gaussian(A=" << g.A << ", sigma=" << g.sigma << ")"; },
                 [&](const BargmannForm& b) { os << "bargmann(kappa=" << b.kappa << ", c=" << b.c << ")"; },
                 [&](const TabulatedForm& t) { os << "tabulated(" << t.r.size() << " samples)"; },
                 [&](const FunctionForm& f) { os << f.name; },
             },
             form_);
  return os.str();
}

Potential zero_potential() { return Potential(ZeroForm{}); }
Potential piecewise(std::vector<double> breakpoints, std::vector<double> values) {
  return Potential(PiecewiseForm{std::move(breakpoints), std::move(values)});
}
Potential square_well(double V0, double a) { return Potential(SquareWellForm{V0, a}); }
Potential exponential(double A, double mu) { return Potential(ExponentialForm{A, mu}); }
Potential gaussian(double A, double sigma) { return Potential(GaussianForm{A, sigma}); }
Potential bargmann_transparent(double kappa, double c) { return Potential(BargmannForm{kappa, c}); }
Potential tabulated(std::vector<double> r, std::vector<double> V) {
  return Potential(TabulatedForm{std::move(r), std::move(V)});
}
Potential from_function(std::function<double(double)> f, double scale, std::string name) {
  return Potential(FunctionForm{std::move(f), scale, std::move(name)});
}

// ---------------------------------------------------------------------------

namespace {

// Integral beyond r_cut where a closed form is available; NaN when unknown.
struct Tails {
  double plain = 0, weighted = 0;
};

Tails analytic_tails(const Potential& pot, double rc) {
  return std::visit(
      overloaded{
          [&](const ExponentialForm& e) {
            const double a = std::abs(e.A) * std::exp(-e.mu * rc);
            return Tails{a / e.mu, a * (rc / e.mu + 1 / (e.mu * e.mu))};
          },
          [&](const GaussianForm& g) {
            const double x = rc / g.sigma;
            return Tails{std::abs(g.A) * g.sigma * std::sqrt(std::numbers::pi) / 2 * std::erfc(x),
                         std::abs(g.A) * g.sigma * g.sigma / 2 * std::exp(-x * x)};
          },
          [&](const BargmannForm& b) {
            const double k = b.kappa, e = 32 * k * k * k * std::exp(-2 * k * rc);
            return Tails{e * (rc / (2 * k) + 1 / (4 * k * k)),
                         e * (rc * rc / (2 * k) + rc / (2 * k * k) + 1 / (4 * k * k * k))};
          },
          [&](const FunctionForm&) {
            return Tails{std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
          },
          [&](const auto&) { return Tails{}; },
      },
      pot.form());
}

// Three dyadic refinements each adding more than 10% of the base value.
bool grows(const std::vector<double>& I) {
  if (!(I[0] > 0)) return !std::isfinite(I[0]);
  for (std::size_t j = 1; j < I.size(); ++j) {
    if (!std::isfinite(I[j])) return true;
    if (!(I[j] - I[j - 1] > 0.1 * I[0])) return false;
  }
  return true;
}

}  // namespace

IntegrabilityReport check_integrability(const Potential& pot, double b, double r_cut) {
  if (!(b > 0) || !(r_cut > b)) throw DomainError("check_integrability: need 0 < b < r_cut");
  IntegrabilityReport rep;
  const auto breaks = pot.breakpoints();
  const double rc = std::max(r_cut, breaks.empty() ? 0.0 : breaks.back());
  auto absV = [&](double r) { return std::abs(pot(r)); };
  auto rabsV = [&](double r) { return r * std::abs(pot(r)); };
  auto quad = [&](auto&& g, double lo, double hi) { return integrate_pieces(g, lo, hi, breaks, 1e-11); };

  std::vector<double> tail(4), origin(4);
  const double eps0 = 0.1 * std::min(b, rc);
  for (int j = 0; j < 4; ++j) {
    const double s = std::ldexp(1.0, j);
    tail[static_cast<std::size_t>(j)] = quad(absV, b, rc * s);
    origin[static_cast<std::size_t>(j)] = quad(rabsV, eps0 / s, rc);
  }
  const bool tail_div = grows(tail);
  const bool origin_div = grows(origin);
  const Tails extra = analytic_tails(pot, rc);

  std::ostringstream diag;
  diag.precision(6);
  if (tail_div) {
    rep.tail_integral = std::numeric_limits<double>::infinity();
    diag << "tail integral grows under dyadic extension of the cutoff (" << tail[0] << " -> " << tail[3]
         << "); ";
  } else {
    rep.tail_integral = quad(absV, b, rc) + (std::isnan(extra.plain) ? tail[3] - tail[0] : extra.plain);
  }
  if (origin_div) {
    rep.origin_integral = std::numeric_limits<double>::infinity();
    diag << "origin integral grows under dyadic refinement toward r=0 (" << origin[0] << " -> " << origin[3]
         << "); ";
  } else {
    rep.origin_integral =
        quad(rabsV, 0.0, rc) + (std::isnan(extra.weighted) ? 0.0 : extra.weighted);
  }
  rep.passes = !tail_div && !origin_div;
  if (rep.passes) diag << "both integrals finite";
  rep.diagnostics = diag.str();
  return rep;
}

}  // namespace scatter
