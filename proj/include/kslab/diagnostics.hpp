#pragma once

// Observables evaluated on simulation states: weighted energies built from
// the transformed (good) variables, a positivity-aware Z functional, singular
// weighted X norms, Taylor coefficients at a tracked vanishing point, the
// blow-up monitor, infimum evolution-rate checks, and the 1/(T*-t) fit.

#include <array>
#include <optional>
#include <vector>

#include "kslab/models.hpp"

namespace kslab {

/// All multi-indices alpha with |alpha| = order (dim entries used).
std::vector<std::array<int, 2>> multi_indices(int dim, int order);
/// Number of ordered index tuples collapsing to alpha: |alpha|! / prod alpha_i!.
double multinomial(const std::array<int, 2>& alpha, int dim);

/// Pointwise squared tensor norm |grad^j g|^2 at every grid point:
/// sum over |alpha| = order of multinomial(alpha) * (d^alpha g)^2.
std::vector<double> gradient_tensor_squared(const Field& g, int order, int comp = 0);

/// Inhomogeneous Sobolev norm sqrt(sum_{j<=m} ||grad^j f||^2), where the
/// j-th tensor norm carries multinomial weights so it matches |grad^j f|^2.
double sobolev_norm(const Field& f, int m, int comp = 0);

/// Transformed variables of order alpha. Without a velocity they reduce to
/// the plain derivatives of rho and f = grad(c); with one they absorb the
/// transport terms:
///   R = d^a rho + (f / k(c)) . d^a u
///   F_i = d^a f_i - f_i (f . d^a u) / (rho k(c))
/// Throws "singular coefficient" when the divisions are not safely bounded.
struct GoodVariables {
  Field R;  ///< scalar
  Field F;  ///< dim components
};
GoodVariables good_variables(const State& s, const ModelConfig& cfg,
                             const std::array<int, 2>& alpha);

/// Order-m energy sum_{|alpha| = m} integral of
///   (k(c)/chi(c)) R_alpha^2 + rho |F_alpha|^2 + |d^alpha u|^2.
/// Throws "degenerate weight" when chi(c) is not bounded away from zero.
double modified_energy(const State& s, const ModelConfig& cfg, int m);

/// Discrete audit of the top-order cancellation that makes the order-m
/// energy estimate close. The flux pairing
///   I  = sum_{|alpha|=m} w_alpha integral c rho grad(d^alpha rho) . S grad(d^alpha c)
/// produced by the cell equation meets the pairing
///   II = -sum_{|alpha|=m} w_alpha sum_j s_jj integral c rho d_j(d^alpha c) d_j(d^alpha rho)
/// produced by the chemical equation. The diagonal part of I cancels II with
/// identical integrands (diagonal_residual is pure roundoff), while the
/// antisymmetric part of S contributes only the lower-order Jacobian
/// remainder: integrating by parts,
///   I_A = -sum_{i<j} a_ij integral d^alpha(rho) J_ij(c rho, d^alpha c),
///   J_ij(F, G) = d_iF d_jG - d_jF d_iG,
/// which pairs no (m+1)-st derivative of rho against one of c. `residual`
/// is I + II + the Jacobian remainder; it vanishes to spectral accuracy
/// (aliasing of the quartic products) on resolved fields.
struct CancellationCheck {
  double pairing = 0.0;            ///< I, assembled with the full S contraction
  double counter_pairing = 0.0;    ///< II, assembled axis by axis
  double jacobian_remainder = 0.0; ///< sum_{i<j} a_ij integral d^alpha rho J_ij(c rho, d^alpha c)
  double diagonal_residual = 0.0;  ///< diagonal part of I plus II (roundoff only)
  double residual = 0.0;           ///< I + II + jacobian_remainder
  double scale = 0.0;              ///< max(1, sum of the absolute-integrand quadratures)
};
CancellationCheck cancellation_check(const State& s, const ModelConfig& cfg, int m);

/// Cumulative functional controlling the continuation criterion:
///   Z_m = sum_{j<=m} sum_{|alpha|=j} ( ||sqrt(c) R_alpha||^2
///         + ||sqrt(rho) F_alpha||^2 + ||d^alpha u||^2 )
///         + 1/inf(rho) + 1/inf(c) + sup|f|.
/// Throws "infimum too small" when inf(rho) or inf(c) <= eps_floor.
struct ZBreakdown {
  std::vector<double> order_terms;  ///< per-order energy contributions, j = 0..m
  double inv_inf_rho = 0.0;
  double inv_inf_c = 0.0;
  double sup_f = 0.0;
  double total = 0.0;
};
ZBreakdown z_functional(const State& s, const ModelConfig& cfg, int m);

/// Singular weighted norm of a non-negative scalar g:
///   part_0 = integral g^{2-gamma}
///   part_k = integral |grad^k g|^2/(g+eps)^gamma
///          + integral |grad g|^{2k}/(g+eps)^{2k+gamma-2},   1 <= k <= m
/// total = sum of parts. Diverges as eps -> 0 exactly when g vanishes too
/// fast for its regularity.
struct WeightedXNorm {
  std::vector<double> parts;
  double total = 0.0;
};
WeightedXNorm weighted_X_norm(const Field& g, int m, double gamma, double eps, int comp = 0);

/// Two-sided comparability of rho with c^delta on the positivity set.
/// Throws "degenerate weight" when the admissible set is empty.
struct RatioBounds {
  double sup_rho_over_c_delta = 0.0;
  double sup_c_delta_over_rho = 0.0;
};
RatioBounds ratio_bounds(const State& s, double delta, double eps_floor);

/// Second-order Taylor data at the grid point nearest x0, for per-axis even
/// fields rho ~ sum_i R_i x_i^2 and c ~ c0 - sum_i C_i x_i^2:
///   C_i = -d_ii c / 2,   R_i = d_ii rho / 2.
struct TaylorCoeffs {
  std::array<double, 2> C{0.0, 0.0};
  std::array<double, 2> R{0.0, 0.0};
  double c0 = 0.0;
  double rho0 = 0.0;
  std::size_t index = 0;  ///< flat index of the evaluation point
};
TaylorCoeffs taylor_coeffs(const State& s, const std::array<double, 2>& x0);

/// Breakdown monitor ||c||_{W^{2,inf}} + ||rho||_{W^{1,inf}} (+ ||u||_{W^{1,inf}}),
/// each W^{k,inf} the sum over orders of the sup of the pointwise tensor norm.
double blowup_monitor(const State& s);

/// Chemically weighted norms sqrt(sum_{j<=m} ||sqrt(c) grad^j g||^2) for
/// g = rho and g = f = grad(c). The weight clips c at zero.
struct YNorms {
  double y_rho = 0.0;
  double y_f = 0.0;
};
YNorms y_norms(const State& s, int m);

/// Per-sample diagnostic row. Scalar columns are always present; vector
/// columns follow the orders configured in DiagnosticsConfig.
struct DiagnosticsRecord {
  double t = 0.0;
  double dt = 0.0;
  double mass = 0.0;
  double sup_rho = 0.0, inf_rho = 0.0;
  double sup_c = 0.0, inf_c = 0.0;
  double inv_inf_rho = 0.0, inv_inf_c = 0.0;  ///< NaN when infima are not positive
  double sup_u = 0.0;
  double div_u_sup = 0.0;
  double sup_f = 0.0;        ///< sup |grad c|
  double sup_grad_f = 0.0;   ///< sup |grad^2 c|
  double sup_abs_lap_c = 0.0;
  double sup_reaction = 0.0;          ///< sup |k(c) rho|
  double sup_consumption_rate = 0.0;  ///< sup k(c) rho / c on the positivity set
  double sup_drift_rho = 0.0;   ///< sup |chi'(c) (grad c . S grad c) + chi(c) tr(S grad^2 c)|
  double monitor = 0.0;
  double spectral_tail = 0.0;  ///< max tail fraction over evolved fields
  std::vector<double> energies;     ///< modified_energy per configured order
  std::vector<double> z_orders;     ///< Z order terms (empty when disabled/invalid)
  double z_total = 0.0;             ///< NaN when Z is not computable
  std::vector<double> x_parts;      ///< weighted X parts for (x_m, x_gamma)
  double x_total = 0.0;
  double y_rho = 0.0, y_f = 0.0;
  double ratio_rho_over_c = 0.0, ratio_c_over_rho = 0.0;  ///< NaN when disabled
  std::array<double, 2> taylor_C{0.0, 0.0};
  std::array<double, 2> taylor_R{0.0, 0.0};
  double c_at_x0 = 0.0, rho_at_x0 = 0.0;
};

struct DiagnosticsConfig {
  std::vector<int> energy_orders{0, 1, 2, 3};
  int z_order = 3;
  bool track_z = true;
  int x_m = 2;
  double x_gamma = 1.0;
  double x_eps = 1e-6;
  bool track_x = false;
  double ratio_delta = 1.0;
  bool track_ratio = false;
  int y_order = 1;
  std::array<double, 2> taylor_x0{0.0, 0.0};
  bool track_taylor = false;
  double eps_floor = 1e-12;
};

DiagnosticsRecord collect(const State& s, const ModelConfig& cfg,
                          const DiagnosticsConfig& dc, double dt_used);

/// Central-difference audit of the infimum evolution inequalities
///   |d/dt inf(rho)^-1| <= sup_drift_rho * inf(rho)^-1
///   |d/dt inf(c)^-1|   <= sup(k(c) rho / c) * inf(c)^-1
/// (for the linear consumption law k(c) = c the second factor is sup rho)
/// over consecutive uniformly spaced triples of records. Ratios at or below
/// one confirm the rates; values above one bound the discrepancy.
struct InfimumRateResult {
  double worst_ratio_rho = 0.0;
  double worst_ratio_c = 0.0;
  int triples = 0;  ///< number of admissible uniform triples inspected
};
InfimumRateResult infimum_rate_check(const std::vector<DiagnosticsRecord>& records);

/// Least-squares fit of 1/C = a + b t over the trailing `window` samples:
/// blow-up time T* = -a/b, strength kappa = -1/b so C ~ kappa/(T*-t), and the
/// log-log exponent of C against (T*-t) with its r^2.
/// Throws "non-monotone series" when C is not strictly increasing on the
/// window and "fit does not indicate blow-up" when the trend has b >= 0.
struct BlowupFit {
  double t_star = 0.0;
  double kappa = 0.0;
  double exponent = 0.0;
  double r2 = 0.0;
  int window = 0;
};
BlowupFit fit_blowup_rate(const std::vector<double>& ts, const std::vector<double>& Cs,
                          int window);

}  // namespace kslab
