#pragma once

// Radial potentials V(r) in units of 1/L^2 (hbar^2/2m = 1, E = k^2).

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace scatter {

class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ZeroForm {};

/// V = values[j] on (breakpoints[j-1], breakpoints[j]], 0 beyond the last breakpoint.
struct PiecewiseForm {
  std::vector<double> breakpoints;
  std::vector<double> values;
};

/// V = -V0 for r < a, 0 beyond.
struct SquareWellForm {
  double V0 = 0, a = 1;
};

/// V = A exp(-mu r)
struct ExponentialForm {
  double A = 0, mu = 1;
};

/// V = A exp(-(r/sigma)^2)
struct GaussianForm {
  double A = 0, sigma = 1;
};

/// V = -2 d^2/dr^2 ln(1 + c I(r)),  I(r) = int_0^r sinh^2(kappa t) dt.
struct BargmannForm {
  double kappa = 1, c = 1;
};

/// Piecewise-linear through (r, V) samples, constant before the first sample, 0 after the last.
struct TabulatedForm {
  std::vector<double> r, V;
};

/// Arbitrary callable, mostly for tests. `scale` sets the length scale used for cutoffs.
struct FunctionForm {
  std::function<double(double)> f;
  double scale = 1;
  std::string name = "function";
};

class Potential {
 public:
  using Form = std::variant<ZeroForm, PiecewiseForm, SquareWellForm, ExponentialForm, GaussianForm,
                            BargmannForm, TabulatedForm, FunctionForm>;

  Potential() = default;
  explicit Potential(Form form);

  /// V(r); right limit at a breakpoint.
  double operator()(double r) const { return evaluate(r); }
  double evaluate(double r) const;
  double left_limit(double r) const;

  /// Radii where V (or its slope) is discontinuous.
  std::span<const double> breakpoints() const { return breaks_; }
  /// Characteristic length: last breakpoint or decay length.
  double support_scale() const { return scale_; }
  /// Radius beyond which |V| <= eps.
  double tail_radius(double eps) const;
  double lower_bound() const { return vmin_; }
  double upper_bound() const { return vmax_; }
  bool is_zero() const;
  bool is_smooth() const { return breaks_.empty(); }

  std::string describe() const;
  const Form& form() const { return form_; }

 private:
  Form form_;
  std::vector<double> breaks_;
  double scale_ = 1, vmin_ = 0, vmax_ = 0;
};

Potential zero_potential();
Potential piecewise(std::vector<double> breakpoints, std::vector<double> values);
Potential square_well(double V0, double a);
Potential exponential(double A, double mu);
Potential gaussian(double A, double sigma);
Potential bargmann_transparent(double kappa, double c);
Potential tabulated(std::vector<double> r, std::vector<double> V);
Potential from_function(std::function<double(double)> f, double scale, std::string name = "function");

struct IntegrabilityReport {
  double tail_integral = 0;    // int_b^inf |V|
  double origin_integral = 0;  // int_0^inf r |V|
  bool passes = false;
  std::string diagnostics;
};

IntegrabilityReport check_integrability(const Potential& pot, double b, double r_cut);

}  // namespace scatter
