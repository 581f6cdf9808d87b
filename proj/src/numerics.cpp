#include "scatter/numerics.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace scatter {

namespace {

std::size_t locate(std::span<const double> x, double v) {
  if (v <= x.front()) return 0;
  if (v >= x.back()) return x.size() - 2;
  auto it = std::upper_bound(x.begin(), x.end(), v);
  return static_cast<std::size_t>(it - x.begin()) - 1;
}

void require_ascending(std::span<const double> x, const char* who) {
  if (x.size() < 2) throw std::invalid_argument(std::string(who) + ": need at least two knots");
  for (std::size_t i = 1; i < x.size(); ++i)
    if (!(x[i] > x[i - 1]))
      throw std::invalid_argument(std::string(who) + ": knots must be strictly increasing");
}

}  // namespace

// ---------------------------------------------------------------------------

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  require_ascending(x_, "MonotoneCubic");
  if (x_.size() != y_.size()) throw std::invalid_argument("MonotoneCubic: size mismatch");
  const std::size_t n = x_.size();
  std::vector<double> h(n - 1), del(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    h[i] = x_[i + 1] - x_[i];
    del[i] = (y_[i + 1] - y_[i]) / h[i];
  }
  d_.assign(n, 0.0);
  if (n == 2) {
    d_[0] = d_[1] = del[0];
    return;
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (del[i - 1] * del[i] <= 0.0) {
      d_[i] = 0.0;
    } else {
      const double w1 = 2 * h[i] + h[i - 1], w2 = h[i] + 2 * h[i - 1];
      d_[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
    }
  }
  auto end_slope = [](double h0, double h1, double d0, double d1) {
    double d = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (d * d0 <= 0.0) return 0.0;
    if (d0 * d1 <= 0.0 && std::abs(d) > std::abs(3 * d0)) return 3 * d0;
    return d;
  };
  d_[0] = end_slope(h[0], h[1], del[0], del[1]);
  d_[n - 1] = end_slope(h[n - 2], h[n - 3], del[n - 2], del[n - 3]);
}

std::size_t MonotoneCubic::interval(double x) const { return locate(x_, x); }

double MonotoneCubic::operator()(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double h00 = (1 + 2 * t) * (1 - t) * (1 - t), h10 = t * (1 - t) * (1 - t);
  const double h01 = t * t * (3 - 2 * t), h11 = t * t * (t - 1);
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::derivative(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double t = (x - x_[i]) / h;
  const double d00 = 6 * t * t - 6 * t, d10 = 3 * t * t - 4 * t + 1;
  const double d01 = -6 * t * t + 6 * t, d11 = 3 * t * t - 2 * t;
  return (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * d_[i] + d11 * d_[i + 1];
}

// ---------------------------------------------------------------------------

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y, End end)
    : x_(std::move(x)), y_(std::move(y)) {
  require_ascending(x_, "CubicSpline");
  if (x_.size() != y_.size()) throw std::invalid_argument("CubicSpline: size mismatch");
  const std::size_t n = x_.size();
  m_.assign(n, 0.0);
  if (n == 2) return;
  if (n == 3 && end == End::not_a_knot) end = End::natural;

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];

  // Dense-banded solve through Eigen keeps the end conditions simple.
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const auto r = static_cast<int>(i);
    t.emplace_back(r, r - 1, h[i - 1] / 6);
    t.emplace_back(r, r, (h[i - 1] + h[i]) / 3);
    t.emplace_back(r, r + 1, h[i] / 6);
    rhs[r] = (y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1];
  }
  const int last = static_cast<int>(n) - 1;
  if (end == End::natural) {
    t.emplace_back(0, 0, 1.0);
    t.emplace_back(last, last, 1.0);
  } else {
    // third derivative continuous across the second and penultimate knots
    t.emplace_back(0, 0, 1.0 / h[0]);
    t.emplace_back(0, 1, -1.0 / h[0] - 1.0 / h[1]);
    t.emplace_back(0, 2, 1.0 / h[1]);
    t.emplace_back(last, last - 2, 1.0 / h[n - 3]);
    t.emplace_back(last, last - 1, -1.0 / h[n - 3] - 1.0 / h[n - 2]);
    t.emplace_back(last, last, 1.0 / h[n - 2]);
  }
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw NumericalError("CubicSpline: singular system");
  Eigen::VectorXd m = lu.solve(rhs);
  for (std::size_t i = 0; i < n; ++i) m_[i] = m[static_cast<Eigen::Index>(i)];
}

CubicSpline CubicSpline::from_moments(std::vector<double> x, std::vector<double> y,
                                      std::vector<double> m) {
  require_ascending(x, "CubicSpline");
  CubicSpline s;
  s.x_ = std::move(x);
  s.y_ = std::move(y);
  s.m_ = std::move(m);
  return s;
}

std::size_t CubicSpline::interval(double x) const { return locate(x_, x); }

double CubicSpline::operator()(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] +
         ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6;
}

double CubicSpline::derivative(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
  return (y_[i + 1] - y_[i]) / h - (3 * a * a - 1) * h * m_[i] / 6 + (3 * b * b - 1) * h * m_[i + 1] / 6;
}

double CubicSpline::second_derivative(double x) const {
  const std::size_t i = interval(x);
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - x) / h, b = (x - x_[i]) / h;
  return a * m_[i] + b * m_[i + 1];
}

// ---------------------------------------------------------------------------

namespace {

// trace(B^-1 C) for symmetric pentadiagonal B and C: only the band of B^-1 is needed,
// obtained from B = L D L^T by the backward recursion for the inverse.
double band_inverse_trace(const Eigen::SparseMatrix<double>& B, const Eigen::SparseMatrix<double>& C) {
  const Eigen::Index M = B.rows();
  auto at = [M](const Eigen::SparseMatrix<double>& A, Eigen::Index i, Eigen::Index j) {
    return (i < 0 || j < 0 || i >= M || j >= M) ? 0.0 : A.coeff(i, j);
  };
  std::vector<double> D(static_cast<std::size_t>(M)), l1(static_cast<std::size_t>(M), 0.0),
      l2(static_cast<std::size_t>(M), 0.0);  // l1[i] = L(i, i-1), l2[i] = L(i, i-2)
  auto L = [&](Eigen::Index i, Eigen::Index j) {
    if (j < 0 || i >= M) return 0.0;
    if (i - j == 1) return l1[static_cast<std::size_t>(i)];
    if (i - j == 2) return l2[static_cast<std::size_t>(i)];
    return 0.0;
  };
  for (Eigen::Index i = 0; i < M; ++i) {
    const auto u = static_cast<std::size_t>(i);
    if (i >= 2) l2[u] = at(B, i, i - 2) / D[u - 2];
    if (i >= 1) l1[u] = (at(B, i, i - 1) - (i >= 2 ? l2[u] * l1[u - 1] * D[u - 2] : 0.0)) / D[u - 1];
    double d = at(B, i, i);
    if (i >= 1) d -= l1[u] * l1[u] * D[u - 1];
    if (i >= 2) d -= l2[u] * l2[u] * D[u - 2];
    D[u] = d;
  }
  std::vector<double> z0(static_cast<std::size_t>(M)), z1(static_cast<std::size_t>(M) + 2, 0.0),
      z2(static_cast<std::size_t>(M) + 2, 0.0);
  auto Z = [&](Eigen::Index i, Eigen::Index j) {
    if (i > j) std::swap(i, j);
    if (j >= M) return 0.0;
    const auto u = static_cast<std::size_t>(i);
    if (j == i) return z0[u];
    if (j == i + 1) return z1[u];
    if (j == i + 2) return z2[u];
    return 0.0;
  };
  for (Eigen::Index i = M - 1; i >= 0; --i) {
    const auto u = static_cast<std::size_t>(i);
    const double a = L(i + 1, i), b = L(i + 2, i);
    z2[u] = -(a * Z(i + 1, i + 2) + b * Z(i + 2, i + 2));
    z1[u] = -(a * Z(i + 1, i + 1) + b * Z(i + 2, i + 1));
    z0[u] = 1.0 / D[u] - a * z1[u] - b * z2[u];
  }
  double tr = 0.0;
  for (Eigen::Index i = 0; i < M; ++i) {
    tr += Z(i, i) * at(C, i, i);
    tr += 2.0 * Z(i, i + 1) * at(C, i, i + 1);
    tr += 2.0 * Z(i, i + 2) * at(C, i, i + 2);
  }
  return tr;
}

}  // namespace

SmoothingResult smoothing_spline_gcv(std::span<const double> xs, std::span<const double> ys) {
  require_ascending(xs, "smoothing_spline_gcv");
  const std::size_t n = xs.size();
  SmoothingResult out;
  if (n < 5) {
    out.spline = CubicSpline({xs.begin(), xs.end()}, {ys.begin(), ys.end()});
    out.interpolating = true;
    return out;
  }
  const double x0 = xs.front(), L = xs.back() - xs.front();
  std::vector<double> x(n), h(n - 1);
  for (std::size_t i = 0; i < n; ++i) x[i] = (xs[i] - x0) / L;
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x[i + 1] - x[i];

  using Sp = Eigen::SparseMatrix<double>;
  const auto N = static_cast<Eigen::Index>(n), M = N - 2;
  Sp Q(N, M), R(M, M);
  {
    std::vector<Eigen::Triplet<double>> tq, tr;
    for (Eigen::Index j = 0; j < M; ++j) {
      const double h0 = h[static_cast<std::size_t>(j)], h1 = h[static_cast<std::size_t>(j) + 1];
      tq.emplace_back(j, j, 1.0 / h0);
      tq.emplace_back(j + 1, j, -1.0 / h0 - 1.0 / h1);
      tq.emplace_back(j + 2, j, 1.0 / h1);
      tr.emplace_back(j, j, (h0 + h1) / 3);
      if (j + 1 < M) {
        tr.emplace_back(j, j + 1, h1 / 6);
        tr.emplace_back(j + 1, j, h1 / 6);
      }
    }
    Q.setFromTriplets(tq.begin(), tq.end());
    R.setFromTriplets(tr.begin(), tr.end());
  }
  Eigen::VectorXd y(N);
  for (Eigen::Index i = 0; i < N; ++i) y[i] = ys[static_cast<std::size_t>(i)];
  const Sp QtQ = Sp(Q.transpose()) * Q;
  const Eigen::VectorXd Qty = Q.transpose() * y;

  struct Eval {
    double gcv;
    Eigen::VectorXd fit, gamma;
  };
  auto evaluate = [&](double p) {
    Sp B = R + p * QtQ;
    Eigen::SimplicialLDLT<Sp> ldlt(B);
    Eval e;
    e.gamma = ldlt.solve(Qty);
    e.fit = y - p * (Q * e.gamma);
    const double trA = static_cast<double>(n) - p * band_inverse_trace(B, QtQ);
    const double rss = (y - e.fit).squaredNorm();
    const double denom = static_cast<double>(n) - trA;
    e.gcv = denom > 1e-9 ? static_cast<double>(n) * rss / (denom * denom)
                         : std::numeric_limits<double>::infinity();
    return e;
  };

  const double lo = -14.0, hi = 2.0;
  double best_lp = lo, best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= 32; ++k) {
    const double lp = lo + (hi - lo) * k / 32.0;
    const double g = evaluate(std::pow(10.0, lp)).gcv;
    if (g < best) {
      best = g;
      best_lp = lp;
    }
  }
  if (best_lp <= lo + 1e-12 || !std::isfinite(best)) {
    out.spline = CubicSpline({xs.begin(), xs.end()}, {ys.begin(), ys.end()});
    out.interpolating = true;
    out.smoothing = 0.0;
    out.gcv = best;
    return out;
  }
  // golden-section refinement in log10(p)
  double a = best_lp - 0.5, b = best_lp + 0.5;
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = evaluate(std::pow(10.0, c)).gcv, fd = evaluate(std::pow(10.0, d)).gcv;
  for (int it = 0; it < 30; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = evaluate(std::pow(10.0, c)).gcv;
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = evaluate(std::pow(10.0, d)).gcv;
    }
  }
  const double p = std::pow(10.0, 0.5 * (a + b));
  Eval e = evaluate(p);
  std::vector<double> fit(n), m(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) fit[i] = e.fit[static_cast<Eigen::Index>(i)];
  // moments were computed in the scaled variable
  for (Eigen::Index j = 0; j < M; ++j) m[static_cast<std::size_t>(j) + 1] = e.gamma[j] / (L * L);
  out.spline = CubicSpline::from_moments({xs.begin(), xs.end()}, std::move(fit), std::move(m));
  out.smoothing = p;
  out.gcv = e.gcv;
  out.interpolating = false;
  return out;
}

// ---------------------------------------------------------------------------

PolyFit::PolyFit(std::span<const double> x, std::span<const double> y, int degree, double center)
    : PolyFit(x, y, {}, degree, center) {}

PolyFit::PolyFit(std::span<const double> x, std::span<const double> y, std::span<const double> dy, int degree,
                 double center)
    : center_(center) {
  const bool hermite = !dy.empty();
  if (x.size() != y.size() || (hermite && dy.size() != x.size()))
    throw std::invalid_argument("PolyFit: size mismatch");
  const std::size_t m = x.size() * (hermite ? 2 : 1);
  if (m < static_cast<std::size_t>(degree) + 1)
    throw std::invalid_argument("PolyFit: not enough points for the requested degree");
  double span = 0.0;
  for (double xi : x) span = std::max(span, std::abs(xi - center));
  scale_ = span > 0 ? span : 1.0;
  const auto rows = static_cast<Eigen::Index>(m);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(rows, degree + 1);
  Eigen::VectorXd b(rows);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = (x[i] - center_) / scale_;
    const auto r = static_cast<Eigen::Index>(i);
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      A(r, k) = p;
      p *= t;
    }
    b[r] = y[i];
    if (!hermite) continue;
    // derivative rows in the scaled variable
    const auto rd = static_cast<Eigen::Index>(x.size() + i);
    p = 1.0;
    for (int k = 1; k <= degree; ++k) {
      A(rd, k) = k * p;
      p *= t;
    }
    b[rd] = dy[i] * scale_;
  }
  Eigen::VectorXd c = A.colPivHouseholderQr().solve(b);
  c_.assign(c.data(), c.data() + c.size());
  rms_ = std::sqrt((A * c - b).squaredNorm() / static_cast<double>(rows));
}

double PolyFit::derivative(double x, int k) const {
  const double t = (x - center_) / scale_;
  double s = 0.0;
  for (int j = degree(); j >= k; --j) {
    double coef = c_[static_cast<std::size_t>(j)];
    for (int m = 0; m < k; ++m) coef *= (j - m);
    s = s * t + coef;
  }
  return s / std::pow(scale_, k);
}

// ---------------------------------------------------------------------------

RiccatiBessel riccati_bessel(double ell, double x) {
  const double nu = ell + 0.5;
  if (!(nu > 0)) throw std::domain_error("riccati_bessel: need 2l+1 > 0");
  const double pre = std::sqrt(std::numbers::pi * x / 2);
  const double J = std::cyl_bessel_j(nu, x), J1 = std::cyl_bessel_j(nu + 1, x);
  const double Y = std::cyl_neumann(nu, x), Y1 = std::cyl_neumann(nu + 1, x);
  const double a = (ell + 1) / x;
  return {pre * J, pre * (a * J - J1), pre * Y, pre * (a * Y - Y1)};
}

double free_regular_zero(double ell, int n) {
  if (n < 1) throw std::domain_error("free_regular_zero: n must be >= 1");
  const double nu = ell + 0.5;
  if (!(nu > 0)) throw std::domain_error("free_regular_zero: need 2l+1 > 0");
  auto f = [nu](double x) { return std::cyl_bessel_j(nu, x); };
  double x = std::max(nu, 0.1);
  double fx = f(x);
  int found = 0;
  const double step = 0.2;
  while (true) {
    const double xn = x + step, fn = f(xn);
    if ((fx > 0) != (fn > 0) || fn == 0.0) {
      if (++found == n) return find_root(f, x, xn, 52);
    }
    x = xn;
    fx = fn;
  }
}

}  // namespace scatter
