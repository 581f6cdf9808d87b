#pragma once

// Lines of zeros r_n(l, E) of the regular solution.

#include "scatter/numerics.hpp"
#include "scatter/potentials.hpp"
#include "scatter/radial_solver.hpp"

#include <limits>
#include <vector>

namespace scatter {

enum class PathKind { fixed_ell, fixed_energy, mixed };

struct LinePoint {
  int segment = 1;  // mixed paths: 1 = energy branch at l0, 2 = l branch at E0
  double ell = 0, E = 0;
  double r = std::numeric_limits<double>::infinity();
  double slope = std::numeric_limits<double>::quiet_NaN();  // dr/dE or dr/dl along the path
  bool diverged = false;
};

struct ZeroLine {
  int n = 1;
  PathKind kind = PathKind::fixed_ell;
  double ell0 = 0, E0 = 0;
  std::vector<LinePoint> points;
};

/// n-th zero with the integrals needed for the line derivatives.
struct ZeroInfo {
  bool found = false;
  double r = std::numeric_limits<double>::infinity();
  double dpsi = 0, int_psi2 = 0, int_psi2_r2 = 0;
  double dr_dE() const { return -int_psi2 / (dpsi * dpsi); }
  double dr_dell(double ell) const { return (2 * ell + 1) * int_psi2_r2 / (dpsi * dpsi); }
};

ZeroInfo locate_zero(const Potential& pot, double ell, double E, int n, double r_cap,
                     const SolverConfig& cfg = {});

/// Default divergence cap: 50 support scales.
double default_r_cap(const Potential& pot);

struct TraceOptions {
  double r_cap = 0;             // 0: default_r_cap
  bool refine = true;           // insert points where consecutive radii differ by > max_ratio
  double max_ratio = 0.05;
  int max_depth = 10;
  std::size_t max_points = 4000;
  SolverConfig solver{};
};

ZeroLine trace_fixed_l_line(const Potential& pot, double ell, int n, const std::vector<double>& E_grid,
                            const TraceOptions& opt = {});
ZeroLine trace_fixed_E_line(const Potential& pot, double E, int n, const std::vector<double>& ell_grid,
                            const TraceOptions& opt = {});
ZeroLine trace_mixed_line(const Potential& pot, double ell0, double E0, int n, const std::vector<double>& E_grid,
                          const std::vector<double>& ell_grid, const TraceOptions& opt = {});

struct LineDerivative {
  double r = 0;
  double dr_dE = 0, dr_dell = 0;
};

/// Exact slopes of the line through (l, E) from the integrated solution.
LineDerivative line_derivative_exact(const Potential& pot, double ell, double E, int n, double r_cap = 0,
                                     const SolverConfig& cfg = {});
LineDerivative line_derivative_exact(const Potential& pot, const ZeroLine& line, const LinePoint& p);

enum class LineVariable { energy, ell };

/// Monotone inverse E_n(r) (fixed l) or l_n(r) (fixed E).
struct InverseLine {
  LineVariable variable = LineVariable::energy;
  int n = 1;
  double fixed = 0;  // l for energy lines, E for l lines
  std::vector<double> r, value;
  std::vector<double> exact_slope;  // d value / dr from the solution, when available
  MonotoneCubic interp;

  double operator()(double x) const { return interp(x); }
  double derivative(double x) const { return interp.derivative(x); }
  void rebuild() { interp = MonotoneCubic(r, value); }
};

/// Inverse of one segment of a line (segment 0: the whole fixed line).
InverseLine invert_line(const ZeroLine& line, int segment = 0, double repair_tol = 1e-9);
/// The sample points of an inverse line as a zero line.
ZeroLine to_zero_line(const InverseLine& inv);

/// E with r_n(l, E) = R; throws if no such energy.
double energy_on_line(const Potential& pot, double ell, int n, double R, const SolverConfig& cfg = {});
/// l with r_n(l, E) = R; throws if no such l > -1/2.
double ell_on_line(const Potential& pot, double E, int n, double R, const SolverConfig& cfg = {});

/// Samples E_n(r) (fixed l) on the given radii with exact slopes.
InverseLine sample_energy_line(const Potential& pot, double ell, int n, const std::vector<double>& radii,
                               const SolverConfig& cfg = {});
/// Samples l_n(r) (fixed E) on the given radii with exact slopes.
InverseLine sample_ell_line(const Potential& pot, double E, int n, const std::vector<double>& radii,
                            const SolverConfig& cfg = {});

struct SpectralData {
  double R = 0;
  double ell = 0;
  std::vector<double> eigenvalues;
  std::vector<double> norming;
};

SpectralData spectral_data_at(const Potential& pot, double ell, double R, int n_max, const SolverConfig& cfg = {});

}  // namespace scatter
