#pragma once

// Born and JWKB inversion of mixed phase-shift data
//   { delta(l0, k), k >= k0 }  and  { delta(l, k0), l >= l0 },
// with lambda = l + 1/2 throughout.

#include "scatter/numerics.hpp"
#include "scatter/potentials.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace scatter {

/// More than one root of k^2 - V - lambda^2/r^2; brackets lists the sign changes.
class TurningPointError : public std::runtime_error {
 public:
  TurningPointError(const std::string& what, std::vector<std::pair<double, double>> brackets)
      : std::runtime_error(what), brackets(std::move(brackets)) {}
  std::vector<std::pair<double, double>> brackets;
};

/// Failure inside one stage of an inversion pipeline.
class StageError : public std::runtime_error {
 public:
  StageError(std::string stage, const std::string& what)
      : std::runtime_error(stage + ": " + what), stage(std::move(stage)) {}
  std::string stage;
};

struct PhaseShiftTable {
  double ell0 = 0, k0 = 1;
  std::vector<double> k, delta_k;            // delta(l0, k), k >= k0 ascending
  std::vector<double> lambda, delta_lambda;  // delta(lambda - 1/2, k0), lambda >= lambda0 ascending

  double lambda0() const { return ell0 + 0.5; }
  /// Throws DomainError unless both branches are ascending and continuous
  /// (no step above pi/2 between neighbours).
  void validate() const;
};

enum class CurveParameter { lambda, k };

/// Turning points r(lambda, k0) (parameter lambda) or r(lambda0, k) (parameter k).
struct TurningPointCurve {
  CurveParameter parameter = CurveParameter::lambda;
  double anchor = 0;  // k0 for lambda curves, lambda0 for k curves
  std::vector<double> param, radius;
  bool monotone = true;
  double truncation_error = 0;  // estimated contribution of the extrapolated tail

  double free_radius(std::size_t i) const;
  /// V at each turning point: k^2 - lambda^2 / r^2.
  std::vector<double> potential() const;
};

/// Unique root of k^2 - V(r) - lambda^2 / r^2.
double turning_point(const Potential& pot, double lambda, double k);

/// Semiclassical phase shift relative to the free problem.
double jwkb_phase_shift(const Potential& pot, double lambda, double k);

struct PhaseSamples {
  std::vector<double> x, delta;
  double truncation_error = 0;
};

/// delta(lambda) = integral over lambda' > lambda of sqrt(lambda'^2 - lambda^2) d/dlambda' ln(r / r_free),
/// evaluated at every parameter of a lambda curve.
PhaseSamples sabatier_forward(const TurningPointCurve& curve);
/// Same from ln(r / r_free) given as a function of lambda.
double sabatier_forward(const std::function<double(double)>& log_ratio, double lambda, double lambda_max);

/// r(lambda, k0) from the fixed-energy branch.
TurningPointCurve abel_invert_fixed_energy(const PhaseShiftTable& table);

/// delta(l0, k) from r(lambda0, k) - lambda0/k tabulated on [0, K] (fixed-l forward transform).
PhaseSamples fixed_l_forward(const TurningPointCurve& curve);

/// r(lambda0, k) for the k of the fixed-l branch; low_k supplies delta(l0, k) on [0, k0).
TurningPointCurve abel_invert_fixed_l(const PhaseShiftTable& table, const PhaseSamples& low_k);

/// delta(l0, k) for k <= k0 from the turning points of the fixed-energy branch.
PhaseSamples reconstruct_low_k_phase(const TurningPointCurve& fixed_energy_curve, double lambda0,
                                     const std::vector<double>& k);

struct JwkbReconstruction {
  Potential potential;
  TurningPointCurve outer, inner;  // r >= r0 from the fixed-energy branch, r <= r0 from the fixed-l branch
  PhaseSamples low_k;
  double r0 = 0;
  double seam_residual = 0;  // |V_outer(r0) - V_inner(r0)|
  double seam_radius_mismatch = 0;
};

JwkbReconstruction mixed_jwkb_invert(const PhaseShiftTable& table, int low_k_points = 200);

/// Mixed table of semiclassical phase shifts for a potential.
PhaseShiftTable jwkb_phase_table(const Potential& pot, double ell0, double k0, const std::vector<double>& k,
                                 const std::vector<double>& lambda);

// ---------------------------------------------------------------------------
// Born approximation

enum class BornSource { from_potential, from_fixed_energy_data, extended_by_fixed_l_data };

/// g(q) = integral of sin(q r) r V(r) over r > 0.
struct BornTransform {
  std::vector<double> q, g;
  BornSource source = BornSource::from_potential;
};

BornTransform born_g_from_potential(const Potential& pot, const std::vector<double>& q);

/// Born s-wave phase shift: -(1/k) * integral of sin^2(k r) V(r).
double born_phase_shift(const Potential& pot, double k);

struct BornInvertOptions {
  double taper_start = 0.5;  // fraction of the largest q where the cutoff taper begins
};

/// r V(r) = (2/pi) integral of sin(q r) g(q) over the covered q, tapered at the top.
std::vector<double> born_invert_rV(const BornTransform& t, const std::vector<double>& radii,
                                   const BornInvertOptions& opt = {});

struct BornReconstruction {
  Potential potential;
  BornTransform transform;
  std::vector<double> r, rV;
  double q_seam = 0;
  double seam_mismatch = 0;  // |g(2 k0-) - g(2 k0+)|
};

/// Extends g beyond 2 k0 with g(2k) = -d(k delta(0, k))/dk and inverts.
BornReconstruction born_extend_and_invert(const BornTransform& fixed_energy, const std::vector<double>& k,
                                          const std::vector<double>& delta0, const std::vector<double>& radii,
                                          const BornInvertOptions& opt = {});

}  // namespace scatter
