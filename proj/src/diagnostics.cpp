#include "kslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace kslab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// Extracts one component as a standalone scalar field.
Field component(const Field& f, int comp) {
  Field out = make_field(f.grid, 1);
  std::copy(f.data(comp), f.data(comp) + f.grid.points(), out.data(0));
  return out;
}

// Kahan-compensated quadrature of a pointwise functional over the grid.
template <typename F>
double integrate_pointwise(const Grid& g, F&& f) {
  double sum = 0.0, comp = 0.0;
  const std::size_t np = g.points();
  for (std::size_t i = 0; i < np; ++i) {
    const double y = f(i) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double w = g.spacing();
  if (g.dim == 2) w *= g.spacing();
  return w * sum;
}

double sup_sqrt(const std::vector<double>& sq) {
  double m = 0.0;
  for (double v : sq) m = std::max(m, v);
  return std::sqrt(m);
}

// W^{k,inf} of a (possibly multi-component) field: sum over derivative orders
// of the sup of the pointwise Euclidean norm across components and tensor
// indices.
double w_k_inf(const Field& f, int k) {
  double total = 0.0;
  for (int j = 0; j <= k; ++j) {
    std::vector<double> sq(f.grid.points(), 0.0);
    for (int comp = 0; comp < f.components; ++comp) {
      const std::vector<double> part = gradient_tensor_squared(f, j, comp);
      for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += part[i];
    }
    total += sup_sqrt(sq);
  }
  return total;
}

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / static_cast<double>(n);
  const double my = sy / static_cast<double>(n);
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace

std::vector<std::array<int, 2>> multi_indices(int dim, int order) {
  std::vector<std::array<int, 2>> out;
  if (dim == 1) {
    out.push_back({order, 0});
  } else {
    for (int a0 = order; a0 >= 0; --a0) out.push_back({a0, order - a0});
  }
  return out;
}

double multinomial(const std::array<int, 2>& alpha, int dim) {
  const int order = alpha[0] + (dim == 2 ? alpha[1] : 0);
  double denom = factorial(alpha[0]);
  if (dim == 2) denom *= factorial(alpha[1]);
  return factorial(order) / denom;
}

std::vector<double> gradient_tensor_squared(const Field& g, int order, int comp) {
  const Grid& grid = g.grid;
  std::vector<double> out(grid.points(), 0.0);
  Field single = make_field(grid, 1);
  std::copy(g.data(comp), g.data(comp) + grid.points(), single.data(0));
  for (const auto& alpha : multi_indices(grid.dim, order)) {
    const Field d = derivative(single, alpha);
    const double w = multinomial(alpha, grid.dim);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += w * d.values[i] * d.values[i];
  }
  return out;
}

double sobolev_norm(const Field& f, int m, int comp) {
  double sum = 0.0;
  const Field single = component(f, comp);
  for (int j = 0; j <= m; ++j) {
    for (const auto& alpha : multi_indices(f.grid.dim, j)) {
      const Field d = derivative(single, alpha);
      sum += multinomial(alpha, f.grid.dim) * inner(d, d);
    }
  }
  return std::sqrt(sum);
}

GoodVariables good_variables(const State& s, const ModelConfig& cfg,
                             const std::array<int, 2>& alpha) {
  const Grid& g = s.rho.grid;
  const Field f = gradient(s.c);
  GoodVariables gv;
  gv.R = derivative(s.rho, alpha);
  gv.F = make_field(g, g.dim);
  for (int comp = 0; comp < g.dim; ++comp) {
    const Field d = derivative(component(f, comp), alpha);
    std::copy(d.data(0), d.data(0) + g.points(), gv.F.data(comp));
  }
  if (!cfg.include_fluid || !s.u) return gv;

  const Field k_c = eval_coefficient(cfg.k, s.c);
  double min_k = k_c.values[0], min_rho = s.rho.values[0];
  for (std::size_t i = 0; i < g.points(); ++i) {
    min_k = std::min(min_k, k_c.values[i]);
    min_rho = std::min(min_rho, s.rho.values[i]);
  }
  if (min_k <= cfg.eps_floor || min_rho <= cfg.eps_floor)
    throw std::runtime_error("singular coefficient");

  Field du = make_field(g, g.dim);
  for (int comp = 0; comp < g.dim; ++comp) {
    const Field d = derivative(component(*s.u, comp), alpha);
    std::copy(d.data(0), d.data(0) + g.points(), du.data(comp));
  }
  for (std::size_t i = 0; i < g.points(); ++i) {
    double f_dot_du = 0.0;
    for (int a = 0; a < g.dim; ++a) f_dot_du += f.at(a, i) * du.at(a, i);
    gv.R.values[i] += f_dot_du / k_c.values[i];
    const double denom = s.rho.values[i] * k_c.values[i];
    for (int a = 0; a < g.dim; ++a) gv.F.at(a, i) -= f.at(a, i) * f_dot_du / denom;
  }
  return gv;
}

double modified_energy(const State& s, const ModelConfig& cfg, int m) {
  const Grid& g = s.rho.grid;
  const Field chi_c = eval_coefficient(cfg.chi, s.c);
  for (double v : chi_c.values)
    if (v <= cfg.eps_floor) throw std::runtime_error("degenerate weight");
  const Field k_c = eval_coefficient(cfg.k, s.c);

  double total = 0.0;
  for (const auto& alpha : multi_indices(g.dim, m)) {
    const GoodVariables gv = good_variables(s, cfg, alpha);
    std::optional<Field> du;
    if (cfg.include_fluid && s.u) {
      du = make_field(g, g.dim);
      for (int comp = 0; comp < g.dim; ++comp) {
        const Field d = derivative(component(*s.u, comp), alpha);
        std::copy(d.data(0), d.data(0) + g.points(), du->data(comp));
      }
    }
    total += integrate_pointwise(g, [&](std::size_t i) {
      double val = (k_c.values[i] / chi_c.values[i]) * gv.R.values[i] * gv.R.values[i];
      double f2 = 0.0;
      for (int a = 0; a < g.dim; ++a) f2 += gv.F.at(a, i) * gv.F.at(a, i);
      val += s.rho.values[i] * f2;
      if (du) {
        double u2 = 0.0;
        for (int a = 0; a < g.dim; ++a) u2 += du->at(a, i) * du->at(a, i);
        val += u2;
      }
      return val;
    });
  }
  return total;
}

CancellationCheck cancellation_check(const State& s, const ModelConfig& cfg, int m) {
  if (m < 0) throw std::invalid_argument("order must be non-negative");
  const Grid& g = s.rho.grid;

  Field w = make_field(g);  // the shared weight c rho of both pairings
  for (std::size_t i = 0; i < g.points(); ++i)
    w.values[i] = s.c.values[i] * s.rho.values[i];
  const Field gw = gradient(w);

  const double s00 = cfg.S.s[0][0];
  const double s11 = cfg.S.s[1][1];
  // Antisymmetric off-diagonal part; the symmetric part is required to be
  // diagonal, so a01 carries everything the diagonal pairing misses.
  const double a01 = g.dim == 2 ? 0.5 * (cfg.S.s[0][1] - cfg.S.s[1][0]) : 0.0;

  CancellationCheck out;
  double abs_scale = 0.0;
  for (const auto& alpha : multi_indices(g.dim, m)) {
    const double mult = multinomial(alpha, g.dim);
    const Field dr = derivative(s.rho, alpha);
    const Field dc = derivative(s.c, alpha);
    const Field gr = gradient(dr);
    const Field gc = gradient(dc);

    // I: full contraction grad(d^a rho) . S grad(d^a c), diagonal part kept
    // separately so the identical-integrand cancellation can be audited.
    double diag = 0.0;
    out.pairing += mult * integrate_pointwise(g, [&](std::size_t i) {
      std::array<double, 2> v{gc.at(0, i), g.dim == 2 ? gc.at(1, i) : 0.0};
      const auto Sg = cfg.S.apply(v, g.dim);
      double full = gr.at(0, i) * Sg[0];
      if (g.dim == 2) full += gr.at(1, i) * Sg[1];
      return w.values[i] * full;
    });
    diag += mult * integrate_pointwise(g, [&](std::size_t i) {
      double d = s00 * gr.at(0, i) * gc.at(0, i);
      if (g.dim == 2) d += s11 * gr.at(1, i) * gc.at(1, i);
      return w.values[i] * d;
    });
    abs_scale += mult * integrate_pointwise(g, [&](std::size_t i) {
      double d = std::abs(s00 * gr.at(0, i) * gc.at(0, i));
      if (g.dim == 2) d += std::abs(s11 * gr.at(1, i) * gc.at(1, i)) +
                           std::abs(a01) * (std::abs(gr.at(0, i) * gc.at(1, i)) +
                                            std::abs(gr.at(1, i) * gc.at(0, i)));
      return std::abs(w.values[i]) * d;
    });

    // II: the chemical-equation pairing, assembled axis by axis.
    for (int axis = 0; axis < g.dim; ++axis) {
      const double sd = axis == 0 ? s00 : s11;
      out.counter_pairing -= mult * sd * integrate_pointwise(g, [&](std::size_t i) {
        return w.values[i] * gc.at(axis, i) * gr.at(axis, i);
      });
    }

    // Jacobian remainder of the antisymmetric part (2D only).
    if (g.dim == 2 && a01 != 0.0) {
      out.jacobian_remainder += mult * a01 * integrate_pointwise(g, [&](std::size_t i) {
        const double J = gw.at(0, i) * gc.at(1, i) - gw.at(1, i) * gc.at(0, i);
        return dr.values[i] * J;
      });
      abs_scale += mult * std::abs(a01) * integrate_pointwise(g, [&](std::size_t i) {
        return std::abs(dr.values[i]) * (std::abs(gw.at(0, i) * gc.at(1, i)) +
                                         std::abs(gw.at(1, i) * gc.at(0, i)));
      });
    }

    out.diagonal_residual += diag;
  }
  out.diagonal_residual += out.counter_pairing;
  out.residual = out.pairing + out.counter_pairing + out.jacobian_remainder;
  out.scale = std::max(1.0, abs_scale);
  return out;
}

ZBreakdown z_functional(const State& s, const ModelConfig& cfg, int m) {
  const Grid& g = s.rho.grid;
  const double inf_rho = reduce(s.rho, Reduce::inf).value;
  const double inf_c = reduce(s.c, Reduce::inf).value;
  if (inf_rho <= cfg.eps_floor || inf_c <= cfg.eps_floor)
    throw std::runtime_error("infimum too small");

  ZBreakdown z;
  z.order_terms.assign(static_cast<std::size_t>(m) + 1, 0.0);
  for (int j = 0; j <= m; ++j) {
    for (const auto& alpha : multi_indices(g.dim, j)) {
      const GoodVariables gv = good_variables(s, cfg, alpha);
      std::optional<Field> du;
      if (cfg.include_fluid && s.u) {
        du = make_field(g, g.dim);
        for (int comp = 0; comp < g.dim; ++comp) {
          const Field d = derivative(component(*s.u, comp), alpha);
          std::copy(d.data(0), d.data(0) + g.points(), du->data(comp));
        }
      }
      z.order_terms[static_cast<std::size_t>(j)] += integrate_pointwise(g, [&](std::size_t i) {
        double val = s.c.values[i] * gv.R.values[i] * gv.R.values[i];
        double f2 = 0.0;
        for (int a = 0; a < g.dim; ++a) f2 += gv.F.at(a, i) * gv.F.at(a, i);
        val += s.rho.values[i] * f2;
        if (du) {
          double u2 = 0.0;
          for (int a = 0; a < g.dim; ++a) u2 += du->at(a, i) * du->at(a, i);
          val += u2;
        }
        return val;
      });
    }
  }
  z.inv_inf_rho = 1.0 / inf_rho;
  z.inv_inf_c = 1.0 / inf_c;
  const Field f = gradient(s.c);
  double sup_f2 = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i) {
    double f2 = 0.0;
    for (int a = 0; a < g.dim; ++a) f2 += f.at(a, i) * f.at(a, i);
    sup_f2 = std::max(sup_f2, f2);
  }
  z.sup_f = std::sqrt(sup_f2);
  z.total = z.inv_inf_rho + z.inv_inf_c + z.sup_f;
  for (double v : z.order_terms) z.total += v;
  return z;
}

WeightedXNorm weighted_X_norm(const Field& g, int m, double gamma, double eps, int comp) {
  const Grid& grid = g.grid;
  WeightedXNorm x;
  x.parts.assign(static_cast<std::size_t>(m) + 1, 0.0);
  const double* gv = g.data(comp);

  x.parts[0] = integrate_pointwise(grid, [&](std::size_t i) {
    const double z = gv[i] > 0.0 ? gv[i] : 0.0;
    return std::pow(z, 2.0 - gamma);
  });

  if (m >= 1) {
    const std::vector<double> grad_sq = gradient_tensor_squared(g, 1, comp);
    for (int k = 1; k <= m; ++k) {
      const std::vector<double> high_sq = k == 1 ? grad_sq : gradient_tensor_squared(g, k, comp);
      const double low_exp = 2.0 * k + gamma - 2.0;
      x.parts[static_cast<std::size_t>(k)] =
          integrate_pointwise(grid, [&](std::size_t i) {
            const double w = gv[i] + eps;
            return high_sq[i] / std::pow(w, gamma);
          }) +
          integrate_pointwise(grid, [&](std::size_t i) {
            const double w = gv[i] + eps;
            return std::pow(grad_sq[i], static_cast<double>(k)) / std::pow(w, low_exp);
          });
    }
  }
  for (double v : x.parts) x.total += v;
  return x;
}

RatioBounds ratio_bounds(const State& s, double delta, double eps_floor) {
  const Grid& g = s.rho.grid;
  RatioBounds r;
  bool any = false;
  for (std::size_t i = 0; i < g.points(); ++i) {
    const double c = s.c.values[i];
    const double rho = s.rho.values[i];
    if (c <= eps_floor || rho <= eps_floor) continue;
    any = true;
    const double c_delta = std::exp(delta * std::log(c));
    r.sup_rho_over_c_delta = std::max(r.sup_rho_over_c_delta, rho / c_delta);
    r.sup_c_delta_over_rho = std::max(r.sup_c_delta_over_rho, c_delta / rho);
  }
  if (!any) throw std::runtime_error("degenerate weight");
  return r;
}

TaylorCoeffs taylor_coeffs(const State& s, const std::array<double, 2>& x0) {
  const Grid& g = s.rho.grid;
  const double h = g.spacing();
  std::array<int, 2> idx{0, 0};
  for (int a = 0; a < g.dim; ++a) {
    const long raw = std::lround(x0[static_cast<std::size_t>(a)] / h);
    idx[static_cast<std::size_t>(a)] = static_cast<int>(((raw % g.n) + g.n) % g.n);
  }
  const std::size_t flat = g.dim == 1 ? static_cast<std::size_t>(idx[0])
                                      : static_cast<std::size_t>(idx[0]) * g.n + idx[1];
  TaylorCoeffs tc;
  tc.index = flat;
  tc.c0 = s.c.values[flat];
  tc.rho0 = s.rho.values[flat];
  for (int a = 0; a < g.dim; ++a) {
    std::array<int, 2> alpha{0, 0};
    alpha[static_cast<std::size_t>(a)] = 2;
    tc.C[static_cast<std::size_t>(a)] = -0.5 * derivative(s.c, alpha).values[flat];
    tc.R[static_cast<std::size_t>(a)] = 0.5 * derivative(s.rho, alpha).values[flat];
  }
  return tc;
}

double blowup_monitor(const State& s) {
  double m = w_k_inf(s.c, 2) + w_k_inf(s.rho, 1);
  if (s.u) m += w_k_inf(*s.u, 1);
  return m;
}

YNorms y_norms(const State& s, int m) {
  const Grid& g = s.rho.grid;
  const Field f = gradient(s.c);
  auto weighted = [&](const Field& target) {
    double sum = 0.0;
    for (int j = 0; j <= m; ++j) {
      std::vector<double> sq(g.points(), 0.0);
      for (int comp = 0; comp < target.components; ++comp) {
        const std::vector<double> part = gradient_tensor_squared(target, j, comp);
        for (std::size_t i = 0; i < sq.size(); ++i) sq[i] += part[i];
      }
      sum += integrate_pointwise(g, [&](std::size_t i) {
        const double w = s.c.values[i] > 0.0 ? s.c.values[i] : 0.0;
        return w * sq[i];
      });
    }
    return sum;
  };
  YNorms y;
  y.y_rho = std::sqrt(weighted(s.rho));
  y.y_f = std::sqrt(weighted(f));
  return y;
}

DiagnosticsRecord collect(const State& s, const ModelConfig& cfg,
                          const DiagnosticsConfig& dc, double dt_used) {
  const Grid& g = s.rho.grid;
  DiagnosticsRecord r;
  r.t = s.t;
  r.dt = dt_used;
  r.mass = integrate(s.rho);
  r.sup_rho = reduce(s.rho, Reduce::sup).value;
  r.inf_rho = reduce(s.rho, Reduce::inf).value;
  r.sup_c = reduce(s.c, Reduce::sup).value;
  r.inf_c = reduce(s.c, Reduce::inf).value;
  r.inv_inf_rho = r.inf_rho > dc.eps_floor ? 1.0 / r.inf_rho : kNaN;
  r.inv_inf_c = r.inf_c > dc.eps_floor ? 1.0 / r.inf_c : kNaN;

  if (s.u) {
    double m2 = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
      double v2 = 0.0;
      for (int a = 0; a < g.dim; ++a) v2 += s.u->at(a, i) * s.u->at(a, i);
      m2 = std::max(m2, v2);
    }
    r.sup_u = std::sqrt(m2);
    r.div_u_sup = reduce(divergence(*s.u), Reduce::sup_abs).value;
  }

  const Field f = gradient(s.c);
  {
    std::vector<double> f2(g.points(), 0.0);
    for (std::size_t i = 0; i < g.points(); ++i)
      for (int a = 0; a < g.dim; ++a) f2[i] += f.at(a, i) * f.at(a, i);
    r.sup_f = sup_sqrt(f2);
  }
  r.sup_grad_f = sup_sqrt(gradient_tensor_squared(s.c, 2));
  const Field lap_c = laplacian(s.c);
  r.sup_abs_lap_c = reduce(lap_c, Reduce::sup_abs).value;

  const Field k_c = eval_coefficient(cfg.k, s.c);
  double sup_react = 0.0, sup_rate = 0.0;
  for (std::size_t i = 0; i < g.points(); ++i) {
    sup_react = std::max(sup_react, std::abs(k_c.values[i] * s.rho.values[i]));
    if (s.c.values[i] > dc.eps_floor)
      sup_rate = std::max(sup_rate, k_c.values[i] * s.rho.values[i] / s.c.values[i]);
  }
  r.sup_reaction = sup_react;
  r.sup_consumption_rate = sup_rate;

  // sup |chi'(c) (grad c . S grad c) + chi(c) tr(S grad^2 c)|: the rate at
  // which the flux divergence can move an interior minimum of rho.
  {
    std::array<std::array<int, 2>, 2> second{{{2, 0}, {0, 2}}};
    Field d2_diag = make_field(g, g.dim);
    for (int a = 0; a < g.dim; ++a) {
      const Field d = derivative(s.c, second[static_cast<std::size_t>(a)]);
      std::copy(d.data(0), d.data(0) + g.points(), d2_diag.data(a));
    }
    std::optional<Field> d2_mixed;
    if (g.dim == 2) d2_mixed = derivative(s.c, {1, 1});
    double m = 0.0;
    for (std::size_t i = 0; i < g.points(); ++i) {
      std::array<double, 2> gc{f.at(0, i), g.dim == 2 ? f.at(1, i) : 0.0};
      const std::array<double, 2> sg = cfg.S.apply(gc, g.dim);
      double quad = gc[0] * sg[0] + gc[1] * sg[1];
      // tr(S grad^2 c) = sum_ij S_ij d_ij c; the antisymmetric part cancels.
      double tr = cfg.S.s[0][0] * d2_diag.at(0, i);
      if (g.dim == 2) {
        tr += cfg.S.s[1][1] * d2_diag.at(1, i);
        tr += (cfg.S.s[0][1] + cfg.S.s[1][0]) * (*d2_mixed).values[i];
      }
      const double drift = cfg.chi.eval_deriv(s.c.values[i]) * quad + cfg.chi.eval(s.c.values[i]) * tr;
      m = std::max(m, std::abs(drift));
    }
    r.sup_drift_rho = m;
  }

  r.monitor = blowup_monitor(s);
  r.spectral_tail = std::max(spectral_tail_fraction(s.rho), spectral_tail_fraction(s.c));
  if (s.u)
    for (int a = 0; a < g.dim; ++a)
      r.spectral_tail = std::max(r.spectral_tail, spectral_tail_fraction(*s.u, a));

  for (int m : dc.energy_orders) {
    double e = kNaN;
    try {
      e = modified_energy(s, cfg, m);
    } catch (const std::runtime_error&) {
      // degenerate weight: leave NaN in the record rather than aborting
    }
    r.energies.push_back(e);
  }

  r.z_total = kNaN;
  if (dc.track_z) {
    try {
      const ZBreakdown z = z_functional(s, cfg, dc.z_order);
      r.z_orders = z.order_terms;
      r.z_total = z.total;
    } catch (const std::runtime_error&) {
      r.z_orders.assign(static_cast<std::size_t>(dc.z_order) + 1, kNaN);
    }
  }

  if (dc.track_x) {
    const WeightedXNorm x = weighted_X_norm(s.rho, dc.x_m, dc.x_gamma, dc.x_eps);
    r.x_parts = x.parts;
    r.x_total = x.total;
  }

  const YNorms y = y_norms(s, dc.y_order);
  r.y_rho = y.y_rho;
  r.y_f = y.y_f;

  r.ratio_rho_over_c = kNaN;
  r.ratio_c_over_rho = kNaN;
  if (dc.track_ratio) {
    try {
      const RatioBounds rb = ratio_bounds(s, dc.ratio_delta, dc.eps_floor);
      r.ratio_rho_over_c = rb.sup_rho_over_c_delta;
      r.ratio_c_over_rho = rb.sup_c_delta_over_rho;
    } catch (const std::runtime_error&) {
    }
  }

  if (dc.track_taylor) {
    const TaylorCoeffs tc = taylor_coeffs(s, dc.taylor_x0);
    r.taylor_C = tc.C;
    r.taylor_R = tc.R;
    r.c_at_x0 = tc.c0;
    r.rho_at_x0 = tc.rho0;
  }
  return r;
}

InfimumRateResult infimum_rate_check(const std::vector<DiagnosticsRecord>& records) {
  InfimumRateResult res;
  for (std::size_t i = 1; i + 1 < records.size(); ++i) {
    const auto& a = records[i - 1];
    const auto& b = records[i];
    const auto& c = records[i + 1];
    const double d1 = b.t - a.t;
    const double d2 = c.t - b.t;
    if (d1 <= 0.0 || d2 <= 0.0) continue;
    if (std::abs(d1 - d2) > 1e-9 * d1) continue;  // only uniform triples
    if (!std::isfinite(a.inv_inf_rho) || !std::isfinite(c.inv_inf_rho) ||
        !std::isfinite(b.inv_inf_rho) || !std::isfinite(a.inv_inf_c) ||
        !std::isfinite(b.inv_inf_c) || !std::isfinite(c.inv_inf_c))
      continue;
    ++res.triples;

    const double lhs_rho = std::abs(c.inv_inf_rho - a.inv_inf_rho) / (d1 + d2);
    const double rhs_rho = b.sup_drift_rho * b.inv_inf_rho;
    if (rhs_rho > 1e-14)
      res.worst_ratio_rho = std::max(res.worst_ratio_rho, lhs_rho / rhs_rho);
    else if (lhs_rho > 1e-12)
      res.worst_ratio_rho = std::numeric_limits<double>::infinity();

    const double lhs_c = std::abs(c.inv_inf_c - a.inv_inf_c) / (d1 + d2);
    const double rhs_c = b.sup_consumption_rate * b.inv_inf_c;
    if (rhs_c > 1e-14)
      res.worst_ratio_c = std::max(res.worst_ratio_c, lhs_c / rhs_c);
    else if (lhs_c > 1e-12)
      res.worst_ratio_c = std::numeric_limits<double>::infinity();
  }
  return res;
}

BlowupFit fit_blowup_rate(const std::vector<double>& ts, const std::vector<double>& Cs,
                          int window) {
  if (ts.size() != Cs.size()) throw std::invalid_argument("series length mismatch");
  if (window < 3) throw std::invalid_argument("window must have at least 3 samples");
  if (static_cast<std::size_t>(window) > ts.size())
    throw std::invalid_argument("window exceeds series");
  const std::size_t begin = ts.size() - static_cast<std::size_t>(window);
  for (std::size_t i = begin + 1; i < ts.size(); ++i)
    if (!(Cs[i] > Cs[i - 1])) throw std::runtime_error("non-monotone series");

  std::vector<double> t(ts.begin() + static_cast<std::ptrdiff_t>(begin), ts.end());
  std::vector<double> z(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) z[i] = 1.0 / Cs[begin + i];
  const LineFit lin = fit_line(t, z);
  if (lin.slope >= 0.0) throw std::runtime_error("fit does not indicate blow-up");

  BlowupFit fit;
  fit.window = window;
  fit.t_star = -lin.intercept / lin.slope;
  fit.kappa = -1.0 / lin.slope;
  fit.r2 = lin.r2;

  // exponent of C ~ (T*-t)^p from a log-log regression on the same window
  std::vector<double> lx(t.size()), ly(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double gap = fit.t_star - t[i];
    lx[i] = std::log(gap > 1e-300 ? gap : 1e-300);
    ly[i] = std::log(Cs[begin + i]);
  }
  fit.exponent = fit_line(lx, ly).slope;
  return fit;
}

}  // namespace kslab
