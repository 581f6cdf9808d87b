#pragma once

// Regular solution of  psi'' = (V(r) - E + l(l+1)/r^2) psi,  psi ~ r^(l+1) at the origin.

#include "scatter/potentials.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace scatter {

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double last_radius)
      : std::runtime_error(what), last_radius(last_radius) {}
  double last_radius;
};

struct SolverConfig {
  double r_start = 0;   // 0: chosen from the local wavenumber
  double r_match = 0;   // 0: chosen from the potential's range
  double rel_tol = 1e-12;
  double abs_tol = 1e-300;
  double max_step = 0;  // 0: a fraction of the support scale
};

/// Solution state at one radius. Integrals and energy derivatives are only
/// filled when requested.
struct SolutionPoint {
  double r = 0;
  double psi = 0, dpsi = 0;
  double int_psi2 = 0;     // int_0^r psi^2
  double int_psi2_r2 = 0;  // int_0^r psi^2 / r^2
  std::array<double, 3> dE{};     // d^m psi / dE^m, m = 1..3
  std::array<double, 3> dE_dr{};  // radial derivatives of the above
};

struct ShootOptions {
  double r_end = 0;
  int stop_after_zeros = 0;       // stop at this zero (0: run to r_end)
  bool energy_derivatives = false;
  bool record = false;            // keep every accepted step
  bool allow_rescale = false;     // renormalise to avoid overflow (counting only)
};

/// One integration of the regular solution with zero detection.
class RegularSolution {
 public:
  RegularSolution(const Potential& pot, double ell, double E, const ShootOptions& opt,
                  const SolverConfig& cfg = {});

  const std::vector<SolutionPoint>& zeros() const { return zeros_; }
  const std::vector<SolutionPoint>& samples() const { return samples_; }
  const SolutionPoint& end() const { return end_; }
  /// Accumulated renormalisation, ln of the factor divided out of psi.
  double log_scale() const { return log_scale_; }
  /// State at an arbitrary radius inside the recorded range (re-integrates from
  /// the nearest recorded step).
  SolutionPoint at(double r) const;
  double ell() const { return ell_; }
  double energy() const { return E_; }
  const Potential& potential() const { return pot_; }

 private:
  Potential pot_;
  double ell_, E_;
  ShootOptions opt_;
  SolverConfig cfg_;
  std::vector<SolutionPoint> zeros_, samples_;
  SolutionPoint end_;
  double log_scale_ = 0;
};

struct RegularSolutionTrace {
  double ell = 0, energy = 0;
  std::vector<double> grid, psi, dpsi;
  std::vector<double> zeros;
  std::vector<double> zero_slopes;
};

struct PhaseShiftSample {
  double ell = 0, k = 0, delta = 0, residual = 0;
};

struct BoundStateSet {
  double ell = 0;
  std::vector<double> energies;
};

/// Radius used to start the power series for given (l, E).
double default_r_start(const Potential& pot, double ell, double E);
/// Matching radius for phase shifts.
double default_r_match(const Potential& pot);

RegularSolutionTrace integrate_regular(const Potential& pot, double ell, double E, double r_max,
                                       const SolverConfig& cfg = {});

PhaseShiftSample phase_shift(const Potential& pot, double ell, double k, const SolverConfig& cfg = {});

/// Number of zeros (excluding the origin) of the regular solution on the
/// whole half line at energy E <= 0.
int count_nodes_below(const Potential& pot, double ell, double E, const SolverConfig& cfg = {});

BoundStateSet count_bound_states(const Potential& pot, double ell, const SolverConfig& cfg = {});

}  // namespace scatter
