#pragma once

// Shared numerical building blocks: adaptive quadrature, bracketed root
// finding, interpolating / smoothing splines and local polynomial fits.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

namespace scatter {

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive Gauss-Kronrod (15/31) on [a, b].
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, double* error = nullptr,
                 unsigned max_depth = 18) {
  if (a == b) {
    if (error) *error = 0.0;
    return 0.0;
  }
  // on [-1, 1] the rule's local error and its tolerance carry the same scale;
  // on short intervals they do not and the recursion never terminates early
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  auto g = [&](double t) { return f(mid + half * t); };
  double err = 0.0;
  double l1 = 0.0;
  const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, -1.0, 1.0, max_depth, rel_tol,
                                                                                  &err, &l1);
  if (error) *error = std::abs(half) * err;
  return half * v;
}

/// Integrates over [a, b] split at every interior point of `breaks`.
template <class F>
double integrate_pieces(F&& f, double a, double b, std::span<const double> breaks,
                        double rel_tol = 1e-12, double* error = nullptr, unsigned max_depth = 18) {
  double total = 0.0, err_total = 0.0;
  double lo = a;
  // slivers next to a break only feed rounding noise to the adaptive rule
  const double gap = 1e-12 * std::max({std::abs(a), std::abs(b), b - a});
  for (double x : breaks) {
    if (x <= lo + gap || x >= b - gap) continue;
    double e = 0.0;
    total += integrate(f, lo, x, rel_tol, &e, max_depth);
    err_total += e;
    lo = x;
  }
  double e = 0.0;
  total += integrate(f, lo, b, rel_tol, &e, max_depth);
  err_total += e;
  if (error) *error = err_total;
  return total;
}

/// Root of f in [a, b]; f(a) and f(b) must differ in sign.
template <class F>
double find_root(F&& f, double a, double b, int bits = 50, std::uintmax_t max_iter = 200) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0) == (fb > 0)) throw NumericalError("find_root: root not bracketed");
  std::uintmax_t iters = max_iter;
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb,
                                             boost::math::tools::eps_tolerance<double>(bits), iters);
  return 0.5 * (r.first + r.second);
}

// ---------------------------------------------------------------------------
// Piecewise cubics

/// Shape-preserving (Fritsch-Carlson / PCHIP) monotone cubic interpolant.
class MonotoneCubic {
 public:
  MonotoneCubic() = default;
  MonotoneCubic(std::vector<double> x, std::vector<double> y);

  double operator()(double x) const;
  double derivative(double x) const;
  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }
  std::span<const double> slopes() const { return d_; }

 private:
  std::size_t interval(double x) const;
  std::vector<double> x_, y_, d_;
};

/// C2 cubic spline given knot values and knot second derivatives.
class CubicSpline {
 public:
  enum class End { natural, not_a_knot };

  CubicSpline() = default;
  /// Interpolating spline.
  CubicSpline(std::vector<double> x, std::vector<double> y, End end = End::not_a_knot);
  /// Spline from explicit knot values and second derivatives.
  static CubicSpline from_moments(std::vector<double> x, std::vector<double> y,
                                  std::vector<double> m);

  double operator()(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }
  bool empty() const { return x_.empty(); }

 private:
  std::size_t interval(double x) const;
  std::vector<double> x_, y_, m_;
};

/// Cubic smoothing spline whose smoothing weight is chosen by generalised
/// cross-validation. When the data are indistinguishable from exact (GCV
/// optimum pinned at the smallest weight) a not-a-knot interpolant is used.
struct SmoothingResult {
  CubicSpline spline;
  double smoothing = 0.0;  // selected weight on the roughness penalty (x scaled to [0,1])
  double gcv = 0.0;
  bool interpolating = false;
};
SmoothingResult smoothing_spline_gcv(std::span<const double> x, std::span<const double> y);

// ---------------------------------------------------------------------------
// Local polynomial least squares

/// Least-squares polynomial in the scaled variable t = (x - center) / scale.
class PolyFit {
 public:
  PolyFit() = default;
  PolyFit(std::span<const double> x, std::span<const double> y, int degree, double center);
  /// Fits values and first derivatives together (dy may be empty).
  PolyFit(std::span<const double> x, std::span<const double> y, std::span<const double> dy, int degree,
          double center);

  double operator()(double x) const { return derivative(x, 0); }
  /// k-th derivative with respect to x.
  double derivative(double x, int k) const;
  double rms_residual() const { return rms_; }
  int degree() const { return static_cast<int>(c_.size()) - 1; }

 private:
  std::vector<double> c_;
  double center_ = 0.0, scale_ = 1.0, rms_ = 0.0;
};

// ---------------------------------------------------------------------------
// Free (V = 0) regular solution helpers

/// Riccati-Bessel pair u = x j_l(x), w = x y_l(x) and their x-derivatives for
/// real l with 2l+1 > 0 (order nu = l + 1/2).
struct RiccatiBessel {
  double j, dj, y, dy;
};
RiccatiBessel riccati_bessel(double ell, double x);

/// n-th positive zero of x -> x j_l(x) (the free regular solution).
double free_regular_zero(double ell, int n);

}  // namespace scatter
