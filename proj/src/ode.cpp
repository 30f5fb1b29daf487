#include "kslab/ode.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace kslab {

namespace {

constexpr int kMaxDim = 4;
using Vec = std::array<double, kMaxDim>;

int checked_dimension(const BlowupOdeSpec& spec) {
  if (spec.kind == BlowupOdeKind::multi_d && (spec.d < 1 || spec.d > 2)) {
    throw std::invalid_argument("dimension must be 1 or 2");
  }
  return spec.kind == BlowupOdeKind::multi_d ? 2 * spec.d : 2;
}

// Coefficient of C^2 in the conserved quantity, and the factor multiplying R
// in C' (so T* = int dC / (k_lead (lambda C^2 + K))).
double lambda_for(const BlowupOdeSpec& spec) {
  switch (spec.kind) {
    case BlowupOdeKind::scalar_1d: return 3.0;
    case BlowupOdeKind::scalar_general_chik: return 3.0 * spec.chi1 / spec.k1;
    case BlowupOdeKind::multi_d: return static_cast<double>(spec.d) + 2.0;
  }
  throw std::invalid_argument("unknown blow-up ODE kind");
}

double k_lead(const BlowupOdeSpec& spec) {
  return spec.kind == BlowupOdeKind::scalar_general_chik ? spec.k1 : 1.0;
}

void rhs_vec(const BlowupOdeSpec& spec, const Vec& y, int n, Vec& out) {
  switch (spec.kind) {
    case BlowupOdeKind::scalar_1d:
      out[0] = y[1];
      out[1] = 6.0 * y[0] * y[1];
      break;
    case BlowupOdeKind::scalar_general_chik:
      out[0] = spec.k1 * y[1];
      out[1] = 6.0 * spec.chi1 * y[0] * y[1];
      break;
    case BlowupOdeKind::multi_d: {
      const int d = n / 2;
      double csum = 0.0;
      for (int i = 0; i < d; ++i) csum += y[static_cast<std::size_t>(i)];
      for (int i = 0; i < d; ++i) {
        out[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(d + i)];
        out[static_cast<std::size_t>(d + i)] =
            2.0 * y[static_cast<std::size_t>(d + i)] *
            (2.0 * y[static_cast<std::size_t>(i)] + csum);
      }
      break;
    }
  }
}

// First integral of a state, or NaN when no scalar invariant applies
// (asymmetric multi-d data).
double invariant_or_nan(const BlowupOdeSpec& spec, const Vec& y, int n) {
  if (spec.kind == BlowupOdeKind::multi_d) {
    const int d = n / 2;
    for (int i = 1; i < d; ++i) {
      if (std::abs(y[static_cast<std::size_t>(i)] - y[0]) > 1e-9 * std::max(1.0, std::abs(y[0])) ||
          std::abs(y[static_cast<std::size_t>(d + i)] - y[static_cast<std::size_t>(d)]) >
              1e-9 * std::max(1.0, std::abs(y[static_cast<std::size_t>(d)]))) {
        return std::numeric_limits<double>::quiet_NaN();
      }
    }
    return y[static_cast<std::size_t>(d)] - lambda_for(spec) * y[0] * y[0];
  }
  return y[1] - lambda_for(spec) * y[0] * y[0];
}

// Dormand-Prince 5(4) with the first-same-as-last stage and PI step control.
struct Dp54 {
  const BlowupOdeSpec& spec;
  int n;
  double rtol, atol;

  double t = 0.0;
  Vec y{};
  Vec f{};  // f(t, y), reused as the first stage of the next step
  double h = 1e-6;
  double err_prev = 1e-4;
  long accepted = 0;
  long rejected = 0;

  // previous accepted point, for interpolation inside the last step
  double t_prev = 0.0;
  Vec y_prev{};
  Vec f_prev{};

  Dp54(const BlowupOdeSpec& s, const Vec& y0, int dim, double rt, double at)
      : spec(s), n(dim), rtol(rt), atol(at) {
    y = y0;
    rhs_vec(spec, y, n, f);
    // scale the first trial step to the solution's own timescale
    double ynorm = 0.0, fnorm = 0.0;
    for (int i = 0; i < n; ++i) {
      ynorm = std::max(ynorm, std::abs(y[static_cast<std::size_t>(i)]));
      fnorm = std::max(fnorm, std::abs(f[static_cast<std::size_t>(i)]));
    }
    h = std::clamp(0.01 * std::max(ynorm, 1e-6) / std::max(fnorm, 1e-6), 1e-8, 0.1);
    y_prev = y;
    f_prev = f;
  }

  /// One accepted step of size at most h_cap (h_cap <= 0: uncapped). Retries
  /// internally on error-test failures. Throws on step-size underflow.
  void step(double h_cap) {
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    for (int attempt = 0; attempt < 200; ++attempt) {
      double hs = h;
      if (h_cap > 0.0) hs = std::min(hs, h_cap);
      if (!(t + hs > t)) throw std::runtime_error("step size underflow");

      Vec k2{}, k3{}, k4{}, k5{}, k6{}, k7{}, stage{}, ynew{};
      for (int i = 0; i < n; ++i) stage[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] + hs * a21 * f[static_cast<std::size_t>(i)];
      rhs_vec(spec, stage, n, k2);
      for (int i = 0; i < n; ++i) stage[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] + hs * (a31 * f[static_cast<std::size_t>(i)] + a32 * k2[static_cast<std::size_t>(i)]);
      rhs_vec(spec, stage, n, k3);
      for (int i = 0; i < n; ++i) stage[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] + hs * (a41 * f[static_cast<std::size_t>(i)] + a42 * k2[static_cast<std::size_t>(i)] + a43 * k3[static_cast<std::size_t>(i)]);
      rhs_vec(spec, stage, n, k4);
      for (int i = 0; i < n; ++i) stage[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] + hs * (a51 * f[static_cast<std::size_t>(i)] + a52 * k2[static_cast<std::size_t>(i)] + a53 * k3[static_cast<std::size_t>(i)] + a54 * k4[static_cast<std::size_t>(i)]);
      rhs_vec(spec, stage, n, k5);
      for (int i = 0; i < n; ++i) stage[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] + hs * (a61 * f[static_cast<std::size_t>(i)] + a62 * k2[static_cast<std::size_t>(i)] + a63 * k3[static_cast<std::size_t>(i)] + a64 * k4[static_cast<std::size_t>(i)] + a65 * k5[static_cast<std::size_t>(i)]);
      rhs_vec(spec, stage, n, k6);
      for (int i = 0; i < n; ++i) {
        ynew[static_cast<std::size_t>(i)] = y[static_cast<std::size_t>(i)] + hs * (b1 * f[static_cast<std::size_t>(i)] + b3 * k3[static_cast<std::size_t>(i)] + b4 * k4[static_cast<std::size_t>(i)] + b5 * k5[static_cast<std::size_t>(i)] + b6 * k6[static_cast<std::size_t>(i)]);
      }
      rhs_vec(spec, ynew, n, k7);

      double err = 0.0;
      bool finite = true;
      for (int i = 0; i < n; ++i) {
        const double e = hs * (e1 * f[static_cast<std::size_t>(i)] + e3 * k3[static_cast<std::size_t>(i)] + e4 * k4[static_cast<std::size_t>(i)] + e5 * k5[static_cast<std::size_t>(i)] + e6 * k6[static_cast<std::size_t>(i)] + e7 * k7[static_cast<std::size_t>(i)]);
        const double sc = atol + rtol * std::max(std::abs(y[static_cast<std::size_t>(i)]), std::abs(ynew[static_cast<std::size_t>(i)]));
        err += (e / sc) * (e / sc);
        finite = finite && std::isfinite(ynew[static_cast<std::size_t>(i)]) && std::isfinite(k7[static_cast<std::size_t>(i)]);
      }
      err = std::sqrt(err / n);

      if (!finite) {
        h = hs * 0.1;
        ++rejected;
        continue;
      }
      if (err <= 1.0) {
        t_prev = t;
        y_prev = y;
        f_prev = f;
        t += hs;
        y = ynew;
        f = k7;
        ++accepted;
        const double fac = err > 0.0
                               ? std::clamp(0.9 * std::pow(err, -0.17) *
                                                std::pow(err_prev, 0.04),
                                            0.2, 5.0)
                               : 5.0;
        h = hs * fac;
        err_prev = std::max(err, 1e-4);
        return;
      }
      h = hs * std::max(0.1, 0.9 * std::pow(err, -0.2));
      ++rejected;
    }
    throw std::runtime_error("step size control failed to converge");
  }
};

// Cubic Hermite evaluation of a scalar observable across the last accepted
// step, at normalized position s in [0, 1].
double hermite(double v0, double d0, double v1, double d1, double h, double s) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return (2 * s3 - 3 * s2 + 1) * v0 + (s3 - 2 * s2 + s) * h * d0 +
         (-2 * s3 + 3 * s2) * v1 + (s3 - s2) * h * d1;
}

// Crossing time of C(t) = target inside the last accepted step, via bisection
// on the cubic Hermite model of u = 1/C (asymptotically linear in t as C
// blows up: u' = -k_lead (lambda + K u^2) -> -k_lead lambda).
double locate_crossing(const Dp54& st, double target) {
  const double hstep = st.t - st.t_prev;
  const double u0 = 1.0 / st.y_prev[0];
  const double u1 = 1.0 / st.y[0];
  const double du0 = -st.f_prev[0] / (st.y_prev[0] * st.y_prev[0]);
  const double du1 = -st.f[0] / (st.y[0] * st.y[0]);
  const double ut = 1.0 / target;
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 64; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (hermite(u0, du0, u1, du1, hstep, mid) > ut) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return st.t_prev + 0.5 * (lo + hi) * hstep;
}

Vec to_vec(const std::vector<double>& v, int n) {
  Vec out{};
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)];
  return out;
}

void require_blowup_data(const std::vector<double>& init, int n) {
  if (static_cast<int>(init.size()) != n) {
    throw std::invalid_argument("state dimension mismatch");
  }
  for (const double v : init) {
    if (!(v > 0.0)) throw std::invalid_argument("no blow-up guaranteed");
  }
}

}  // namespace

int BlowupOdeSpec::dimension() const { return checked_dimension(*this); }

std::vector<double> ode_rhs(const BlowupOdeSpec& spec,
                            const std::vector<double>& state, double) {
  const int n = checked_dimension(spec);
  if (static_cast<int>(state.size()) != n) {
    throw std::invalid_argument("state dimension mismatch");
  }
  Vec y = to_vec(state, n);
  Vec out{};
  rhs_vec(spec, y, n, out);
  return std::vector<double>(out.begin(), out.begin() + n);
}

double first_integral(const BlowupOdeSpec& spec,
                      const std::vector<double>& state) {
  const int n = checked_dimension(spec);
  if (static_cast<int>(state.size()) != n) {
    throw std::invalid_argument("state dimension mismatch");
  }
  const double v = invariant_or_nan(spec, to_vec(state, n), n);
  if (std::isnan(v)) throw std::runtime_error("asymmetric multi_d state");
  return v;
}

BlowupResult blowup_time(const BlowupOdeSpec& spec,
                         const std::vector<double>& init, double rtol,
                         double atol) {
  const int n = checked_dimension(spec);
  require_blowup_data(init, n);
  constexpr double kLow = 1e7;
  constexpr double kHigh = 1e8;

  Dp54 st(spec, to_vec(init, n), n, rtol, atol);
  BlowupResult res;
  const double i0 = invariant_or_nan(spec, st.y, n);
  const bool track = !std::isnan(i0);
  if (!track) res.first_integral_drift = std::numeric_limits<double>::quiet_NaN();

  bool crossed_low = false;
  while (true) {
    st.step(0.0);
    if (track && st.y_prev[0] <= 1e3) {
      // measure against the running magnitude of the invariant's constituents:
      // R - lambda C^2 is an O(1) difference of O(C^2) quantities, so a
      // cancellation-relative measure would only report accumulated roundoff
      const double scale =
          std::max({1.0, std::abs(i0),
                    std::abs(st.y[static_cast<std::size_t>(n / 2)]) +
                        lambda_for(spec) * st.y[0] * st.y[0]});
      const double drift =
          std::abs(invariant_or_nan(spec, st.y, n) - i0) / scale;
      res.first_integral_drift = std::max(res.first_integral_drift, drift);
    }
    if (!crossed_low && st.y[0] >= kLow) {
      res.t_low_threshold = locate_crossing(st, kLow);
      crossed_low = true;
    }
    if (st.y[0] >= kHigh) {
      res.t_high_threshold = locate_crossing(st, kHigh);
      break;
    }
    if (st.accepted > 10'000'000) throw std::runtime_error("step limit exceeded");
  }
  // t(M) = T* - a/M to leading order; eliminate a from the two crossings
  res.t_star = res.t_high_threshold +
               (res.t_high_threshold - res.t_low_threshold) * kLow / (kHigh - kLow);
  res.accepted_steps = st.accepted;
  res.rejected_steps = st.rejected;
  return res;
}

double time_to_reach(const BlowupOdeSpec& spec, const std::vector<double>& init,
                     double c_target, double rtol, double atol) {
  const int n = checked_dimension(spec);
  require_blowup_data(init, n);
  if (init[0] >= c_target) return 0.0;
  Dp54 st(spec, to_vec(init, n), n, rtol, atol);
  while (st.y[0] < c_target) {
    st.step(0.0);
    if (st.accepted > 10'000'000) throw std::runtime_error("step limit exceeded");
  }
  return locate_crossing(st, c_target);
}

std::vector<std::vector<double>> integrate_blowup(
    const BlowupOdeSpec& spec, const std::vector<double>& init,
    const std::vector<double>& times, double rtol, double atol) {
  const int n = checked_dimension(spec);
  require_blowup_data(init, n);
  for (std::size_t i = 0; i + 1 < times.size(); ++i) {
    if (!(times[i] < times[i + 1])) {
      throw std::invalid_argument("query times must be strictly increasing");
    }
  }
  if (!times.empty() && times.front() < 0.0) {
    throw std::invalid_argument("query times must be non-negative");
  }

  std::vector<std::vector<double>> out;
  out.reserve(times.size());
  Dp54 st(spec, to_vec(init, n), n, rtol, atol);
  for (const double tq : times) {
    if (tq == 0.0) {
      out.push_back(init);
      continue;
    }
    while (st.t < tq) st.step(0.0);
    // dense output: cubic Hermite per component across the bracketing step
    const double hstep = st.t - st.t_prev;
    const double s = (tq - st.t_prev) / hstep;
    std::vector<double> row(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      row[static_cast<std::size_t>(i)] =
          hermite(st.y_prev[static_cast<std::size_t>(i)], st.f_prev[static_cast<std::size_t>(i)],
                  st.y[static_cast<std::size_t>(i)], st.f[static_cast<std::size_t>(i)], hstep, s);
    }
    out.push_back(std::move(row));
  }
  return out;
}

double blowup_time_quadrature(const BlowupOdeSpec& spec, double C0, double R0) {
  checked_dimension(spec);
  if (!(C0 > 0.0) || !(R0 > 0.0)) {
    throw std::invalid_argument("no blow-up guaranteed");
  }
  const double lambda = lambda_for(spec);
  const double kl = k_lead(spec);
  const double K = R0 - lambda * C0 * C0;

  // 16-point Gauss-Legendre nodes/weights on [-1, 1] (positive half).
  static constexpr double xs[8] = {
      0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
      0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
      0.9445750230732326, 0.9894009349916499};
  static constexpr double ws[8] = {
      0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
      0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
      0.0622535239386479, 0.0271524594117541};

  const auto f = [&](double u) { return 1.0 / (kl * (lambda + K * u * u)); };
  const double upper = 1.0 / C0;
  const int panels = 64;
  const double w = upper / panels;
  double acc = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = (p + 0.5) * w;
    double panel = 0.0;
    for (int j = 0; j < 8; ++j) {
      panel += ws[j] * (f(mid + 0.5 * w * xs[j]) + f(mid - 0.5 * w * xs[j]));
    }
    acc += panel * 0.5 * w;
  }
  return acc;
}

std::vector<CertificateState> certificate_evolve(const CertificateHistory& history,
                                                 const CertificateState& init) {
  if (history.sup_rho.size() != history.sup_grad_f.size()) {
    throw std::invalid_argument("history length mismatch");
  }
  if (history.sup_rho.empty()) {
    throw std::invalid_argument("history must contain at least one sample");
  }
  if (history.sup_rho.size() > 1 && !(history.dt > 0.0)) {
    throw std::invalid_argument("sample spacing must be positive");
  }
  std::vector<CertificateState> out;
  out.reserve(history.sup_rho.size());
  out.push_back(init);
  for (std::size_t j = 0; j + 1 < history.sup_rho.size(); ++j) {
    // freeze each interval's decay rate at the larger endpoint value: the
    // computed certificates can only sit below the exact ODE solution, so
    // they remain valid lower bounds under sampling
    const double rate_rho = std::max(history.sup_rho[j], history.sup_rho[j + 1]);
    const double rate_f =
        std::max(history.sup_grad_f[j], history.sup_grad_f[j + 1]);
    const CertificateState& cur = out.back();
    CertificateState next;
    next.c_lower = cur.c_lower * std::exp(-history.dt * rate_rho);
    next.delta_lower = cur.delta_lower * std::exp(-history.dt * rate_f);
    next.a_lower = cur.a_lower * std::exp(-3.0 * history.dt * rate_f);
    next.r_lower = cur.r_lower * std::exp(-3.0 * history.dt * rate_f);
    out.push_back(next);
  }
  return out;
}

void write_blowup_csv(std::ostream& os, const BlowupOdeSpec& spec,
                      const std::vector<std::array<double, 2>>& inits,
                      double rtol, double atol) {
  const int n = checked_dimension(spec);
  std::vector<std::future<std::pair<BlowupResult, double>>> futs;
  futs.reserve(inits.size());
  for (const auto& cr : inits) {
    futs.push_back(std::async(std::launch::async, [&spec, cr, n, rtol, atol] {
      std::vector<double> init(static_cast<std::size_t>(n));
      const int d = n / 2;
      for (int i = 0; i < d; ++i) {
        init[static_cast<std::size_t>(i)] = cr[0];
        init[static_cast<std::size_t>(d + i)] = cr[1];
      }
      return std::make_pair(blowup_time(spec, init, rtol, atol),
                            blowup_time_quadrature(spec, cr[0], cr[1]));
    }));
  }
  os << "C0,R0,t_star_adaptive,t_star_quadrature,first_integral_drift\n";
  os << std::setprecision(17);
  for (std::size_t i = 0; i < inits.size(); ++i) {
    const auto [res, quad] = futs[i].get();
    os << inits[i][0] << ',' << inits[i][1] << ',' << res.t_star << ',' << quad
       << ',' << res.first_integral_drift << '\n';
  }
}

}  // namespace kslab
