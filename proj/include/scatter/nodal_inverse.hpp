#pragma once

// Piecewise-constant potentials from a single line of zeros, and numerical
// probes of the uniqueness argument.

#include "scatter/nodal_lines.hpp"
#include "scatter/potentials.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace scatter {

class ResolutionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ReconstructionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DiscontinuityEvent {
  double location = 0;       // radius a
  double bracket = 0;        // width of the grid gap holding a
  double jump_third = 0;     // jump of the third derivative of the line variable
  double slope = 0;          // first derivative at a
  double inferred_jump = 0;  // V(a+) - V(a-)
  double confidence = 0;     // statistic / noise floor
};

struct DetectOptions {
  double noise_floor = 0;  // 0: data driven
  int window = 9;          // points in each one-sided fit
  int degree = 6;          // values only
  int slope_degree = 10;   // values and exact slopes
  bool use_slopes = true;
  int background = 30;     // half width (in gaps) of the local background estimate
  double min_jump = 1e-6;  // smallest reportable |V(a+) - V(a-)|
};

/// Scan for third-derivative jumps of E_n(r) or l_n(r).
std::vector<DiscontinuityEvent> detect_discontinuities(const InverseLine& line, const DetectOptions& opt = {});

/// The statistic -p'''/(2p') along the line (p = E or l) from centred local fits.
struct CurvePoint {
  double r, value;
};
std::vector<CurvePoint> jump_profile(const InverseLine& line, int window = 9, int degree = 6);

/// Outside-in sweep assuming V = 0 beyond the last event.
Potential reconstruct_piecewise(const std::vector<DiscontinuityEvent>& events, double min_confidence = 1.0);
Potential reconstruct_piecewise(const InverseLine& line, const DetectOptions& opt = {});

/// Same reconstruction driven by jumps of d^3 r/dE^3 along a fixed-l line r(E).
std::vector<DiscontinuityEvent> detect_discontinuities_rE(const ZeroLine& line, const DetectOptions& opt = {});
Potential reconstruct_from_rE_line(const ZeroLine& line, const DetectOptions& opt = {});

struct JunctionEstimate {
  double r0 = 0;
  double v = 0;        // V(r0-) - V(r0+)
  double V0 = 0;       // bare origin value from the other discontinuities
  double origin = 0;   // V0 + v estimated from the high-energy tail
  double origin_from_zero_constant = 0;  // same, from r_n = j_{l,n} / sqrt(E - V0 - v)
  double residual = 0;
  bool reliable = false;
};

/// Junction step from the high-energy tail of the energy branch of a mixed line.
JunctionEstimate junction_discontinuity(const ZeroLine& mixed_line, int n, double ell0, double bare_origin_value,
                                        int tail_points = 8);

struct MixedReconstruction {
  Potential potential;
  std::vector<DiscontinuityEvent> inner_events, outer_events;
  JunctionEstimate junction;
};

/// Full reconstruction from a mixed line: energy branch inside r0, l branch outside,
/// plus the junction step.
MixedReconstruction reconstruct_mixed(const ZeroLine& mixed_line, const DetectOptions& opt = {});

struct UniquenessProbe {
  std::vector<double> E, ell, r;
  std::vector<double> wronskian_direct, wronskian_quadrature, residual;
  std::vector<double> kernel_diag;  // 2 (dr/dE)^2 psi1' psi2' at (E(r), r); NaN on l branches
  double volterra_norm = 0;         // sup |K_r(r,r') / K(r,r)| over the probed points
  double max_residual = 0;
};

UniquenessProbe wronskian_residual(const Potential& pot1, const Potential& pot2, const ZeroLine& line);

}  // namespace scatter
