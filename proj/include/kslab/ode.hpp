#pragma once

// Exact reference dynamics for the vanishing-point analysis.
//
// When the chemoattractant has a non-degenerate quadratic vanishing point and
// the initial density vanishes quadratically at the same point, the Taylor
// coefficients C(t) (concavity of c) and R(t) (flatness of rho) at that point
// close into a finite-dimensional ODE system:
//
//   scalar (1D):            C' = R,        R' = 6 C R
//   scalar, general laws:   C' = k(1) R,   R' = 6 chi(1) C R
//   multi-D (per axis i):   C_i' = R_i,    R_i' = 2 R_i (2 C_i + sum_j C_j)
//
// With positive data both components blow up in finite time.  Dividing the
// two scalar equations gives dR/dC = (6 chi(1)/k(1)) C, so
// R - lambda C^2 is conserved with lambda = 3 chi(1)/k(1); for symmetric
// multi-D data (all axes equal) the same reduction gives lambda = d + 2.
// The conserved quantity turns T* into the explicit integral
//   T* = int_{C0}^inf dC / (k(1) (lambda C^2 + K)),   K = R0 - lambda C0^2,
// which the substitution u = 1/C maps onto a finite interval.  The adaptive
// integrator and this quadrature provide two independent values of T*.
//
// The second half of the module propagates the certificate constants of the
// lower-bound argument: given the measured sup-norm histories of a PDE run,
//   d/dt c_lower     = -||rho||_inf        c_lower
//   d/dt delta_lower = -||grad f||_inf     delta_lower
//   d/dt a_lower     = -3 ||grad f||_inf   a_lower
//   d/dt r_lower     = -3 ||grad f||_inf   r_lower
// guarantee c >= c_lower everywhere, rho >= a_lower dist(x,x0)^2 inside the
// shrinking neighbourhood of radius delta_lower, and rho >= r_lower outside.

#include <array>
#include <iosfwd>
#include <vector>

namespace kslab {

enum class BlowupOdeKind {
  scalar_1d,            // C' = R, R' = 6 C R
  scalar_general_chik,  // C' = k(1) R, R' = 6 chi(1) C R
  multi_d,              // per-axis coefficients, d in {1, 2}
};

struct BlowupOdeSpec {
  BlowupOdeKind kind = BlowupOdeKind::scalar_1d;
  double k1 = 1.0;    // k(1), scalar_general_chik only
  double chi1 = 1.0;  // chi(1), scalar_general_chik only
  int d = 1;          // dimension, multi_d only

  /// State dimension: (C, R) for the scalar kinds, (C_1..C_d, R_1..R_d) for
  /// multi_d.
  int dimension() const;
};

/// Right-hand side of the blow-up system. Throws std::invalid_argument when
/// the state dimension does not match the kind or d is outside {1, 2}.
std::vector<double> ode_rhs(const BlowupOdeSpec& spec,
                            const std::vector<double>& state, double t = 0.0);

/// Conserved quantity R - lambda C^2 (lambda = 3 chi(1)/k(1) for the scalar
/// kinds, d + 2 for symmetric multi-d states). Throws std::runtime_error
/// "asymmetric multi_d state" when the axis values differ by more than 1e-9
/// relative (the reduction to a single (C, R) pair no longer applies).
double first_integral(const BlowupOdeSpec& spec,
                      const std::vector<double>& state);

struct BlowupResult {
  /// Richardson-extrapolated blow-up time. The crossing time of threshold M
  /// behaves like T* - a/M (from T* - t ~ 1/(k(1) lambda C)), so combining
  /// the crossings at M = 1e7 and 1e8 removes the leading truncation term.
  double t_star = 0.0;
  double t_low_threshold = 0.0;   // first time C reached 1e7
  double t_high_threshold = 0.0;  // first time C reached 1e8
  /// Largest drift of the first integral while C <= 1e3, relative to the
  /// running magnitude |R| + lambda C^2 of its constituents (the invariant is
  /// an O(1) difference of quantities that grow like C^2, so measuring
  /// against the cancellation value itself would only report accumulated
  /// roundoff). NaN for asymmetric multi-d data (no scalar invariant).
  double first_integral_drift = 0.0;
  long accepted_steps = 0;
  long rejected_steps = 0;
};

/// Integrates the blow-up system with an embedded Dormand-Prince 5(4) pair
/// (FSAL, PI step-size control) until C first reaches 1e8; threshold
/// crossings are located by monotone cubic Hermite interpolation of 1/C
/// inside the bracketing step, where 1/C is asymptotically linear in time.
/// Throws std::invalid_argument "no blow-up guaranteed" unless every initial
/// component is strictly positive.
BlowupResult blowup_time(const BlowupOdeSpec& spec,
                         const std::vector<double>& init, double rtol = 1e-12,
                         double atol = 1e-14);

/// First time at which C (the leading component) reaches c_target, located
/// the same way as the blow-up thresholds. Same positivity precondition.
double time_to_reach(const BlowupOdeSpec& spec, const std::vector<double>& init,
                     double c_target, double rtol = 1e-12, double atol = 1e-14);

/// State at each requested time (strictly increasing, starting at or after 0),
/// obtained by clamping adaptive steps onto the query points. Throws
/// std::invalid_argument for unsorted query times.
std::vector<std::vector<double>> integrate_blowup(
    const BlowupOdeSpec& spec, const std::vector<double>& init,
    const std::vector<double>& times, double rtol = 1e-12, double atol = 1e-14);

/// Independent T* oracle: composite 16-point Gauss-Legendre evaluation of
///   int_0^{1/C0} du / (k(1) (lambda + K u^2)),  K = R0 - lambda C0^2.
/// Supports the scalar kinds and symmetric multi-d (C0, R0 per axis).
/// Throws std::invalid_argument "no blow-up guaranteed" for non-positive
/// (C0, R0).
double blowup_time_quadrature(const BlowupOdeSpec& spec, double C0, double R0);

/// Certificate constants of the lower-bound propagation argument.
struct CertificateState {
  double c_lower = 0.0;      // uniform floor for the chemoattractant
  double delta_lower = 0.0;  // radius of the quadratic-vanishing neighbourhood
  double a_lower = 0.0;      // quadratic growth constant near the vanishing point
  double r_lower = 0.0;      // density floor away from the vanishing point
};

/// Uniformly sampled sup-norm histories driving the certificate decay.
struct CertificateHistory {
  double dt = 0.0;
  std::vector<double> sup_rho;     // ||rho(t)||_inf per sample
  std::vector<double> sup_grad_f;  // ||grad f(t)||_inf per sample
};

/// Integrates the four decay ODEs across the sampled history and returns the
/// certificate state at every sample time (front() == init). Each interval
/// uses the larger endpoint rate in an exact exponential update, so the
/// discretisation only ever *lowers* the certificates: they remain valid
/// lower bounds. Exact for constant histories. Throws std::invalid_argument
/// for mismatched lengths, empty history, or non-positive dt.
std::vector<CertificateState> certificate_evolve(const CertificateHistory& history,
                                                 const CertificateState& init);

/// Writes "C0,R0,t_star_adaptive,t_star_quadrature,first_integral_drift"
/// rows for a sweep of symmetric initial data; rows integrate in parallel.
void write_blowup_csv(std::ostream& os, const BlowupOdeSpec& spec,
                      const std::vector<std::array<double, 2>>& inits,
                      double rtol = 1e-12, double atol = 1e-14);

}  // namespace kslab
