#pragma once

// Chemotaxis-consumption systems on the torus, optionally coupled to an
// incompressible velocity field:
//
//   d_t rho + u.grad(rho) = D_rho Lap(rho) - div( chi(c) rho S grad(c) )
//   d_t c   + u.grad(c)   = D_c  Lap(c)   - k(c) rho
//   d_t u   + u.grad(u) + grad(p) = D_u Lap(u) + rho grad(phi),  div(u) = 0
//
// The cell flux is assembled in divergence form and its zero mode removed in
// spectral space, so the discrete cell mass is conserved to roundoff by
// construction. S is a constant sensitivity matrix whose symmetric part must
// be diagonal with positive entries; chi and k are scalar coefficient laws.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kslab/grid.hpp"

namespace kslab {

enum class CoeffKind { constant, power, smooth_of_power };

/// Scalar coefficient law evaluated on the chemical concentration:
///   constant:         value
///   power:            z^gamma            (z clipped at zero)
///   smooth_of_power:  offset + scale * z^gamma
struct CoefficientSpec {
  CoeffKind kind = CoeffKind::constant;
  double value = 1.0;   // constant
  double gamma = 1.0;   // power exponent
  double offset = 0.0;  // smooth_of_power affine part
  double scale = 1.0;

  double eval(double z) const;
  /// d/dz of the law (clipped domain: zero for z <= 0 and fractional powers).
  double eval_deriv(double z) const;
};

/// Pointwise evaluation of a coefficient law on a scalar field component.
Field eval_coefficient(const CoefficientSpec& spec, const Field& c, int comp = 0);

/// Constant sensitivity matrix. In 1D only s[0][0] is used.
struct SensitivityMatrix {
  std::array<std::array<double, 2>, 2> s{{{1.0, 0.0}, {0.0, 1.0}}};

  /// (S g)_i for a gradient vector g.
  std::array<double, 2> apply(const std::array<double, 2>& g, int dim) const;
};

struct ModelConfig {
  int dim = 1;
  double D_rho = 0.0;  ///< cell diffusivity
  double D_c = 0.0;    ///< chemical diffusivity
  double D_u = 0.0;    ///< fluid viscosity
  CoefficientSpec chi;  ///< chemotactic sensitivity chi(c)
  CoefficientSpec k;    ///< consumption rate k(c)
  SensitivityMatrix S;
  bool include_fluid = false;
  std::optional<Field> phi;      ///< potential forcing the fluid through rho*grad(phi)
  bool dealias_products = true;  ///< 2/3-rule truncation of quadratic products
  double eps_floor = 1e-12;      ///< positivity floor for guarded divisions
  /// +1 is the consumption model; -1 flips the reaction term into production,
  /// which violates the structural hypotheses and is only used for the
  /// instability demonstrations.
  double consumption_sign = 1.0;
};

struct State {
  double t = 0.0;
  Field rho;
  Field c;
  std::optional<Field> u;  ///< dim components when the fluid is active
};

struct Rhs {
  Field drho;
  Field dc;
  std::optional<Field> du;
};

/// Fluid-free system (u is ignored even if present).
Rhs rhs_ks(const State& s, const ModelConfig& cfg);
/// Coupled system; requires s.u with cfg.dim components.
Rhs rhs_ksf(const State& s, const ModelConfig& cfg);
/// Dispatches on cfg.include_fluid.
Rhs rhs(const State& s, const ModelConfig& cfg);

/// Removes the gradient part of a vector field in spectral space:
/// u_hat -= k (k . u_hat) / |k|^2. The zero mode is untouched.
Field leray_project(const Field& u);

/// Pressure induced by the fluid nonlinearity and buoyancy at fixed time:
/// solves Lap(p) = div( -u.grad(u) + rho grad(phi) ) spectrally, zero mean.
Field solve_pressure(const Field& u, const Field& rho, const ModelConfig& cfg);

struct ConfigIssue {
  std::string code;     ///< stable machine-readable tag
  std::string message;  ///< human-readable explanation
  bool fatal = false;   ///< fatal issues make the configuration unusable
};

/// Structural hypothesis checks: dimensions, sign of viscosities, symmetric
/// part of S diagonal and positive, coefficient positivity, reaction sign.
std::vector<ConfigIssue> validate_config(const ModelConfig& cfg);

}  // namespace kslab
