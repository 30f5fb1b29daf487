#include "kslab/timestep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kslab {

namespace {

// y += a * dy for all evolved components.
void axpy(State& y, double a, const Rhs& dy) {
  for (std::size_t i = 0; i < y.rho.values.size(); ++i) y.rho.values[i] += a * dy.drho.values[i];
  for (std::size_t i = 0; i < y.c.values.size(); ++i) y.c.values[i] += a * dy.dc.values[i];
  if (y.u && dy.du)
    for (std::size_t i = 0; i < y.u->values.size(); ++i) y.u->values[i] += a * dy.du->values[i];
}

State shifted(const State& y, double a, const Rhs& dy, double t) {
  State out = y;
  axpy(out, a, dy);
  out.t = t;
  return out;
}

// Applies the heat semigroup exp(D_c * dt_eff * Lap) to a scalar field.
Field heat_propagate(const Field& c, double diffusivity, double dt_eff) {
  Spectrum s = forward(c);
  const Grid& g = c.grid;
  const int n = g.n;
  if (g.dim == 1) {
    for (int j = 0; j < n; ++j) {
      const double k = g.wavenumber(j);
      s.values[static_cast<std::size_t>(j)] *= std::exp(-diffusivity * k * k * dt_eff);
    }
  } else {
    for (int j0 = 0; j0 < n; ++j0) {
      const double k0 = g.wavenumber(j0);
      for (int j1 = 0; j1 < n; ++j1) {
        const double k1 = g.wavenumber(j1);
        s.values[static_cast<std::size_t>(j0) * n + j1] *=
            std::exp(-diffusivity * (k0 * k0 + k1 * k1) * dt_eff);
      }
    }
  }
  return inverse(s);
}

double max_pointwise_norm(const Field& f) {
  const std::size_t np = f.grid.points();
  double m = 0.0;
  for (std::size_t i = 0; i < np; ++i) {
    double s2 = 0.0;
    for (int comp = 0; comp < f.components; ++comp) {
      const double v = f.at(comp, i);
      s2 += v * v;
    }
    m = std::max(m, s2);
  }
  return std::sqrt(m);
}

}  // namespace

double transport_speed(const State& s, const ModelConfig& cfg) {
  double speed = max_pointwise_norm(gradient(s.c));
  if (cfg.include_fluid && s.u) speed += max_pointwise_norm(*s.u);
  return speed;
}

CflResult cfl_dt(const State& s, const ModelConfig& cfg, const StepperConfig& sc) {
  CflResult r;
  const double h = s.rho.grid.spacing();
  const double speed = std::max(transport_speed(s, cfg), 1e-14);
  r.dt_transport = sc.cfl_number * h / speed;

  double d_explicit = std::max(cfg.D_rho, cfg.include_fluid ? cfg.D_u : 0.0);
  if (sc.scheme == Scheme::rk4) d_explicit = std::max(d_explicit, cfg.D_c);
  if (d_explicit > 0.0) {
    const Grid& g = s.rho.grid;
    const double k_axis = g.wavenumber(g.n / 2);  // largest mode per axis
    const double k2_max = static_cast<double>(g.dim) * k_axis * k_axis;
    // 2.79 is (just under) the real-axis stability extent of classical RK4.
    r.dt_viscous = sc.cfl_number * 2.79 / (d_explicit * k2_max);
  } else {
    r.dt_viscous = std::numeric_limits<double>::infinity();
  }

  const double raw = std::min(r.dt_transport, r.dt_viscous);
  r.dt = std::clamp(raw, sc.dt_min, sc.dt_max);
  r.clamped_to_min = raw < sc.dt_min;
  return r;
}

State step_rk4(const State& s, const ModelConfig& cfg, double dt) {
  const Rhs f1 = rhs(s, cfg);
  const State y2 = shifted(s, 0.5 * dt, f1, s.t + 0.5 * dt);
  const Rhs f2 = rhs(y2, cfg);
  const State y3 = shifted(s, 0.5 * dt, f2, s.t + 0.5 * dt);
  const Rhs f3 = rhs(y3, cfg);
  const State y4 = shifted(s, dt, f3, s.t + dt);
  const Rhs f4 = rhs(y4, cfg);

  State out = s;
  out.t = s.t + dt;
  axpy(out, dt / 6.0, f1);
  axpy(out, dt / 3.0, f2);
  axpy(out, dt / 3.0, f3);
  axpy(out, dt / 6.0, f4);
  if (out.u) *out.u = leray_project(*out.u);
  return out;
}

State step_imex(const State& s, const ModelConfig& cfg, double dt) {
  // Bitwise-identical fallback: with no stiff part the integrating factor is
  // the identity and the schemes coincide, so reuse the exact same code path.
  if (cfg.D_c == 0.0) return step_rk4(s, cfg, dt);

  ModelConfig explicit_cfg = cfg;  // stiff chemical diffusion handled exactly
  explicit_cfg.D_c = 0.0;
  const double dc = cfg.D_c;

  // Lawson / integrating-factor RK4. All heat propagators below act over
  // non-negative times, so every spectral multiplier is <= 1.
  const Rhs f1 = rhs(s, explicit_cfg);

  State y2 = shifted(s, 0.5 * dt, f1, s.t + 0.5 * dt);
  y2.c = heat_propagate(y2.c, dc, 0.5 * dt);
  const Rhs f2 = rhs(y2, explicit_cfg);

  State y3 = s;
  y3.t = s.t + 0.5 * dt;
  y3.c = heat_propagate(s.c, dc, 0.5 * dt);
  axpy(y3, 0.5 * dt, f2);
  const Rhs f3 = rhs(y3, explicit_cfg);

  State y4 = s;
  y4.t = s.t + dt;
  y4.c = heat_propagate(s.c, dc, dt);
  {
    Rhs f3h = f3;
    f3h.dc = heat_propagate(f3.dc, dc, 0.5 * dt);
    axpy(y4, dt, f3h);
  }
  const Rhs f4 = rhs(y4, explicit_cfg);

  State out = s;
  out.t = s.t + dt;
  // rho and u see the classical RK4 combination of the explicit slopes.
  axpy(out, dt / 6.0, f1);
  axpy(out, dt / 3.0, f2);
  axpy(out, dt / 3.0, f3);
  axpy(out, dt / 6.0, f4);

  // c carries the heat semigroup applied to the state and to each stage
  // slope: c1 = E(c0 + dt/6 F1) + dt/3 E_half (F2 + F3) + dt/6 F4.
  Field c_acc = s.c;
  for (std::size_t i = 0; i < c_acc.values.size(); ++i)
    c_acc.values[i] += dt / 6.0 * f1.dc.values[i];
  c_acc = heat_propagate(c_acc, dc, dt);
  Field mid = make_field(s.c.grid, 1);
  for (std::size_t i = 0; i < mid.values.size(); ++i)
    mid.values[i] = dt / 3.0 * (f2.dc.values[i] + f3.dc.values[i]);
  mid = heat_propagate(mid, dc, 0.5 * dt);
  for (std::size_t i = 0; i < c_acc.values.size(); ++i)
    c_acc.values[i] += mid.values[i] + dt / 6.0 * f4.dc.values[i];
  out.c = std::move(c_acc);

  if (out.u) *out.u = leray_project(*out.u);
  return out;
}

State step(const State& s, const ModelConfig& cfg, const StepperConfig& sc, double dt) {
  return sc.scheme == Scheme::imex ? step_imex(s, cfg, dt) : step_rk4(s, cfg, dt);
}

}  // namespace kslab
