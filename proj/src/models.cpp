#include "kslab/models.hpp"

#include <cmath>
#include <stdexcept>

namespace kslab {

namespace {

// Zero-mode removal in spectral space. The continuous term is a perfect
// divergence, so its mean vanishes identically; zeroing the numerically tiny
// residual makes the discrete mass conservation exact instead of O(eps/step).
Field divergence_zero_mean(const Field& flux) {
  const Grid& g = flux.grid;
  Spectrum s = forward(flux);
  Spectrum div;
  div.grid = g;
  div.components = 1;
  div.values.assign(g.points(), fft::cplx{0.0, 0.0});
  const int n = g.n;
  const int nyq = n / 2;
  for (int axis = 0; axis < g.dim; ++axis) {
    const fft::cplx* base = s.data(axis);
    if (g.dim == 1) {
      for (int j = 0; j < n; ++j) {
        if (j == nyq) continue;  // odd derivative order: Nyquist zeroed
        div.values[static_cast<std::size_t>(j)] += fft::cplx{0.0, g.wavenumber(j)} * base[j];
      }
    } else {
      for (int j0 = 0; j0 < n; ++j0) {
        for (int j1 = 0; j1 < n; ++j1) {
          const int ja = axis == 0 ? j0 : j1;
          if (ja == nyq) continue;
          const std::size_t idx = static_cast<std::size_t>(j0) * n + j1;
          div.values[idx] += fft::cplx{0.0, g.wavenumber(ja)} * base[idx];
        }
      }
    }
  }
  div.values[0] = fft::cplx{0.0, 0.0};
  return inverse(div);
}

Field maybe_dealias(const Field& f, const ModelConfig& cfg) {
  return cfg.dealias_products ? dealias(f) : f;
}

void check_state_shapes(const State& s, const ModelConfig& cfg, bool need_u) {
  if (s.rho.grid.dim != cfg.dim) throw std::invalid_argument("state dim does not match config");
  if (s.rho.grid != s.c.grid) throw std::invalid_argument("rho and c live on different grids");
  if (need_u) {
    if (!s.u) throw std::invalid_argument("fluid model requires a velocity field");
    if (s.u->grid != s.rho.grid || s.u->components != cfg.dim)
      throw std::invalid_argument("velocity field has wrong shape");
  }
}

// Cell flux chi(c) rho (S grad c)_a plus, when present, the transport u_a rho.
// Each component is dealiased before the divergence is taken.
Field cell_flux(const State& s, const ModelConfig& cfg, const Field& grad_c) {
  const Grid& g = s.rho.grid;
  const Field chi_c = eval_coefficient(cfg.chi, s.c);
  Field flux = make_field(g, g.dim);
  for (std::size_t i = 0; i < g.points(); ++i) {
    std::array<double, 2> gc{grad_c.at(0, i), g.dim == 2 ? grad_c.at(1, i) : 0.0};
    const std::array<double, 2> sg = cfg.S.apply(gc, g.dim);
    const double w = chi_c.values[i] * s.rho.values[i];
    for (int a = 0; a < g.dim; ++a) {
      double v = w * sg[static_cast<std::size_t>(a)];
      if (s.u) v += s.u->at(a, i) * s.rho.values[i];
      flux.at(a, i) = v;
    }
  }
  return maybe_dealias(flux, cfg);
}

Rhs rhs_impl(const State& s, const ModelConfig& cfg, bool with_fluid) {
  check_state_shapes(s, cfg, with_fluid);
  const Grid& g = s.rho.grid;

  const Field grad_c = gradient(s.c);

  // rho equation: diffusion minus the exact-divergence flux.
  State su = s;
  if (!with_fluid) su.u.reset();  // fluid-free path ignores any velocity
  Rhs out;
  out.drho = divergence_zero_mean(cell_flux(su, cfg, grad_c));
  for (auto& v : out.drho.values) v = -v;
  if (cfg.D_rho != 0.0) {
    const Field lap_rho = laplacian(s.rho);
    for (std::size_t i = 0; i < g.points(); ++i) out.drho.values[i] += cfg.D_rho * lap_rho.values[i];
  }

  // c equation: diffusion, consumption, advection.
  const Field k_c = eval_coefficient(cfg.k, s.c);
  Field reaction = make_field(g, 1);
  for (std::size_t i = 0; i < g.points(); ++i)
    reaction.values[i] = k_c.values[i] * s.rho.values[i];
  reaction = maybe_dealias(reaction, cfg);
  out.dc = make_field(g, 1);
  for (std::size_t i = 0; i < g.points(); ++i)
    out.dc.values[i] = -cfg.consumption_sign * reaction.values[i];
  if (cfg.D_c != 0.0) {
    const Field lap_c = laplacian(s.c);
    for (std::size_t i = 0; i < g.points(); ++i) out.dc.values[i] += cfg.D_c * lap_c.values[i];
  }
  if (with_fluid) {
    Field adv = make_field(g, 1);
    for (std::size_t i = 0; i < g.points(); ++i) {
      double a = 0.0;
      for (int ax = 0; ax < g.dim; ++ax) a += s.u->at(ax, i) * grad_c.at(ax, i);
      adv.values[i] = a;
    }
    adv = maybe_dealias(adv, cfg);
    for (std::size_t i = 0; i < g.points(); ++i) out.dc.values[i] -= adv.values[i];
  }

  // u equation: advection and buoyancy, projected onto divergence-free fields.
  if (with_fluid) {
    Field nl = make_field(g, g.dim);
    for (int comp = 0; comp < g.dim; ++comp) {
      Field ucomp = make_field(g, 1);
      std::copy(s.u->data(comp), s.u->data(comp) + g.points(), ucomp.data(0));
      const Field grad_ucomp = gradient(ucomp);
      for (std::size_t i = 0; i < g.points(); ++i) {
        double a = 0.0;
        for (int ax = 0; ax < g.dim; ++ax) a += s.u->at(ax, i) * grad_ucomp.at(ax, i);
        nl.at(comp, i) = -a;
      }
    }
    if (cfg.phi) {
      if (cfg.phi->grid != g) throw std::invalid_argument("phi grid does not match state");
      const Field grad_phi = gradient(*cfg.phi);
      for (int comp = 0; comp < g.dim; ++comp)
        for (std::size_t i = 0; i < g.points(); ++i)
          nl.at(comp, i) += s.rho.values[i] * grad_phi.at(comp, i);
    }
    nl = maybe_dealias(nl, cfg);
    out.du = leray_project(nl);
    if (cfg.D_u != 0.0) {
      const Field lap_u = laplacian(*s.u);
      for (std::size_t i = 0; i < out.du->values.size(); ++i)
        out.du->values[i] += cfg.D_u * lap_u.values[i];
    }
  }
  return out;
}

}  // namespace

double CoefficientSpec::eval(double z) const {
  switch (kind) {
    case CoeffKind::constant:
      return value;
    case CoeffKind::power: {
      const double zc = z > 0.0 ? z : 0.0;
      if (gamma == 0.0) return 1.0;
      if (gamma == 1.0) return zc;
      return std::pow(zc, gamma);
    }
    case CoeffKind::smooth_of_power: {
      const double zc = z > 0.0 ? z : 0.0;
      const double p = gamma == 0.0 ? 1.0 : (gamma == 1.0 ? zc : std::pow(zc, gamma));
      return offset + scale * p;
    }
  }
  return 0.0;
}

double CoefficientSpec::eval_deriv(double z) const {
  switch (kind) {
    case CoeffKind::constant:
      return 0.0;
    case CoeffKind::power: {
      if (gamma == 0.0) return 0.0;
      if (gamma == 1.0) return z > 0.0 ? 1.0 : 0.0;
      return z > 0.0 ? gamma * std::pow(z, gamma - 1.0) : 0.0;
    }
    case CoeffKind::smooth_of_power: {
      if (gamma == 0.0) return 0.0;
      if (gamma == 1.0) return z > 0.0 ? scale : 0.0;
      return z > 0.0 ? scale * gamma * std::pow(z, gamma - 1.0) : 0.0;
    }
  }
  return 0.0;
}

Field eval_coefficient(const CoefficientSpec& spec, const Field& c, int comp) {
  Field out = make_field(c.grid, 1);
  const double* p = c.data(comp);
  for (std::size_t i = 0; i < c.grid.points(); ++i) out.values[i] = spec.eval(p[i]);
  return out;
}

std::array<double, 2> SensitivityMatrix::apply(const std::array<double, 2>& g, int dim) const {
  if (dim == 1) return {s[0][0] * g[0], 0.0};
  return {s[0][0] * g[0] + s[0][1] * g[1], s[1][0] * g[0] + s[1][1] * g[1]};
}

Rhs rhs_ks(const State& s, const ModelConfig& cfg) { return rhs_impl(s, cfg, false); }

Rhs rhs_ksf(const State& s, const ModelConfig& cfg) { return rhs_impl(s, cfg, true); }

Rhs rhs(const State& s, const ModelConfig& cfg) {
  return cfg.include_fluid ? rhs_ksf(s, cfg) : rhs_ks(s, cfg);
}

Field leray_project(const Field& u) {
  const Grid& g = u.grid;
  if (u.components != g.dim) throw std::invalid_argument("leray_project needs dim components");
  if (g.dim == 1) {
    // In one dimension the only divergence-free periodic fields are constants.
    Spectrum s = forward(u);
    for (std::size_t j = 1; j < g.points(); ++j) s.values[j] = fft::cplx{0.0, 0.0};
    return inverse(s);
  }
  Spectrum s = forward(u);
  const int n = g.n;
  for (int j0 = 0; j0 < n; ++j0) {
    const double k0 = g.wavenumber(j0);
    for (int j1 = 0; j1 < n; ++j1) {
      const double k1 = g.wavenumber(j1);
      const double k2 = k0 * k0 + k1 * k1;
      if (k2 == 0.0) continue;
      const std::size_t idx = static_cast<std::size_t>(j0) * n + j1;
      const fft::cplx dot = k0 * s.data(0)[idx] + k1 * s.data(1)[idx];
      s.data(0)[idx] -= k0 * dot / k2;
      s.data(1)[idx] -= k1 * dot / k2;
    }
  }
  return inverse(s);
}

Field solve_pressure(const Field& u, const Field& rho, const ModelConfig& cfg) {
  const Grid& g = u.grid;
  Field nl = make_field(g, g.dim);
  for (int comp = 0; comp < g.dim; ++comp) {
    Field ucomp = make_field(g, 1);
    std::copy(u.data(comp), u.data(comp) + g.points(), ucomp.data(0));
    const Field grad_ucomp = gradient(ucomp);
    for (std::size_t i = 0; i < g.points(); ++i) {
      double a = 0.0;
      for (int ax = 0; ax < g.dim; ++ax) a += u.at(ax, i) * grad_ucomp.at(ax, i);
      nl.at(comp, i) = -a;
    }
  }
  if (cfg.phi) {
    const Field grad_phi = gradient(*cfg.phi);
    for (int comp = 0; comp < g.dim; ++comp)
      for (std::size_t i = 0; i < g.points(); ++i)
        nl.at(comp, i) += rho.values[i] * grad_phi.at(comp, i);
  }
  if (cfg.dealias_products) nl = dealias(nl);
  Spectrum s = forward(nl);
  Spectrum p;
  p.grid = g;
  p.components = 1;
  p.values.assign(g.points(), fft::cplx{0.0, 0.0});
  const int n = g.n;
  for (int j0 = 0; j0 < n; ++j0) {
    const double k0 = g.wavenumber(j0);
    for (int j1 = 0; j1 < (g.dim == 2 ? n : 1); ++j1) {
      const double k1 = g.dim == 2 ? g.wavenumber(j1) : 0.0;
      const double k2 = k0 * k0 + k1 * k1;
      if (k2 == 0.0) continue;
      const std::size_t idx = g.dim == 2 ? static_cast<std::size_t>(j0) * n + j1
                                         : static_cast<std::size_t>(j0);
      fft::cplx div{0.0, 0.0};
      div += fft::cplx{0.0, k0} * s.data(0)[idx];
      if (g.dim == 2) div += fft::cplx{0.0, k1} * s.data(1)[idx];
      p.values[idx] = div / (-k2);
    }
  }
  return inverse(p);
}

std::vector<ConfigIssue> validate_config(const ModelConfig& cfg) {
  std::vector<ConfigIssue> issues;
  auto push = [&issues](std::string code, std::string message, bool fatal) {
    issues.push_back(ConfigIssue{std::move(code), std::move(message), fatal});
  };
  if (cfg.dim != 1 && cfg.dim != 2) push("bad-dim", "dim must be 1 or 2", true);
  if (cfg.D_rho < 0.0 || cfg.D_c < 0.0 || cfg.D_u < 0.0)
    push("negative-viscosity", "negative viscosity", true);
  if (cfg.dim == 2) {
    const double off = cfg.S.s[0][1] + cfg.S.s[1][0];
    const double scale = std::max({std::abs(cfg.S.s[0][0]), std::abs(cfg.S.s[0][1]),
                                   std::abs(cfg.S.s[1][0]), std::abs(cfg.S.s[1][1]), 1.0});
    if (std::abs(off) > 1e-14 * scale)
      push("sensitivity-symmetric-part", "S+S^T not diagonal", false);
    if (cfg.S.s[0][0] <= 0.0 || cfg.S.s[1][1] <= 0.0)
      push("sensitivity-diagonal", "S+S^T diagonal not positive", false);
  } else {
    if (cfg.S.s[0][0] <= 0.0) push("sensitivity-diagonal", "S+S^T diagonal not positive", false);
  }
  // Coefficient positivity probed on a representative range of concentrations.
  for (const double z : {cfg.eps_floor, 0.1, 1.0, 10.0}) {
    if (cfg.chi.eval(z) <= 0.0) {
      push("chi-not-positive", "chi(c) not positive on sampled range", false);
      break;
    }
  }
  for (const double z : {0.1, 1.0, 10.0}) {
    if (cfg.k.eval(z) <= 0.0) {
      push("k-not-positive", "k(c) not positive on sampled range", false);
      break;
    }
  }
  if (cfg.consumption_sign != 1.0)
    push("consumption-sign-flipped",
         "reaction term has production sign: structural hypotheses violated", false);
  if (cfg.phi && cfg.phi->grid.dim != cfg.dim)
    push("phi-shape", "phi grid does not match config dim", true);
  return issues;
}

}  // namespace kslab
