#pragma once

// Time integration for the chemotaxis systems: a classical RK4 step, an
// integrating-factor RK4 that propagates the chemical diffusion by the exact
// heat semigroup (useful when D_c makes the explicit step restriction bind),
// and the CFL controller that picks dt from transport and viscous limits.

#include "kslab/models.hpp"

namespace kslab {

enum class Scheme { rk4, imex };

struct StepperConfig {
  Scheme scheme = Scheme::rk4;
  double cfl_number = 0.4;
  double dt_min = 1e-9;
  double dt_max = 1e-2;
};

struct CflResult {
  double dt = 0.0;
  double dt_transport = 0.0;  ///< cfl * spacing / (|u|_inf + |grad c|_inf)
  double dt_viscous = 0.0;    ///< cfl * 2.79 / (D_explicit * |k|_max^2)
  bool clamped_to_min = false;  ///< raw dt fell below dt_min: accuracy warning
};

/// Transport speed |u|_inf + |grad c|_inf entering the CFL bound (pointwise
/// Euclidean norms).
double transport_speed(const State& s, const ModelConfig& cfg);

/// Stable step suggestion. The viscous cap uses only the diffusivities the
/// chosen scheme treats explicitly (imex integrates D_c exactly). The result
/// is clamped to [dt_min, dt_max]; clamped_to_min flags the pre-breakdown
/// regime where dt_min overrides the stability bound.
CflResult cfl_dt(const State& s, const ModelConfig& cfg, const StepperConfig& sc);

/// One classical RK4 step of the full system. The velocity, when present, is
/// re-projected after the update to keep the discrete divergence at roundoff.
State step_rk4(const State& s, const ModelConfig& cfg, double dt);

/// Integrating-factor RK4: the c-equation's diffusion is handled by exact
/// spectral heat propagators (all exponents non-positive, unconditionally
/// stable in D_c), everything else explicitly. With D_c == 0 this routine
/// reduces bitwise to step_rk4.
State step_imex(const State& s, const ModelConfig& cfg, double dt);

/// Dispatch on sc.scheme.
State step(const State& s, const ModelConfig& cfg, const StepperConfig& sc, double dt);

}  // namespace kslab
