#include "kslab/linear.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace kslab {

namespace {

using cplx = std::complex<double>;
using Mat = std::array<std::array<cplx, 3>, 3>;

// out = m * x restricted to the top-left d x d block.
void mat_mul(const Mat& m, const Mat& x, int d, Mat& out) {
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      cplx acc = 0.0;
      for (int l = 0; l < d; ++l) acc += m[static_cast<std::size_t>(i)][static_cast<std::size_t>(l)] * x[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
    }
  }
}

cplx det3(const Mat& m) {
  return m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) -
         m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0]) +
         m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
}

// Largest singular value of the top-left d x d block, via the closed-form
// eigenvalues of the Hermitian positive semi-definite Gram matrix m^H m
// (quadratic formula for d = 2, trigonometric cubic for d = 3).
double spectral_norm(const Mat& m, int d) {
  Mat h{};
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      cplx acc = 0.0;
      for (int l = 0; l < d; ++l) acc += std::conj(m[static_cast<std::size_t>(l)][static_cast<std::size_t>(i)]) * m[static_cast<std::size_t>(l)][static_cast<std::size_t>(j)];
      h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = acc;
    }
  }
  if (d == 1) return std::sqrt(std::max(h[0][0].real(), 0.0));
  if (d == 2) {
    const double a = h[0][0].real();
    const double b = h[1][1].real();
    const double mid = 0.5 * (a + b);
    const double rad = std::hypot(0.5 * (a - b), std::abs(h[0][1]));
    return std::sqrt(std::max(mid + rad, 0.0));
  }
  const double q = (h[0][0].real() + h[1][1].real() + h[2][2].real()) / 3.0;
  const double p1 = std::norm(h[0][1]) + std::norm(h[0][2]) + std::norm(h[1][2]);
  const double d0 = h[0][0].real() - q;
  const double d1 = h[1][1].real() - q;
  const double d2 = h[2][2].real() - q;
  const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
  if (!(p2 > 0.0)) return std::sqrt(std::max(q, 0.0));  // scalar multiple of I
  const double p = std::sqrt(p2 / 6.0);
  Mat bmat{};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      bmat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          h[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] / p;
    }
    bmat[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] -= q / p;
  }
  const double r = std::clamp(det3(bmat).real() / 2.0, -1.0, 1.0);
  const double phi = std::acos(r) / 3.0;
  const double lmax = q + 2.0 * p * std::cos(phi);
  return std::sqrt(std::max(lmax, 0.0));
}

// Energy of column `col` of phi in the kind's metric at time t. Identity
// weight everywhere except the well-posed kind, whose invariant energy is
// |rho^|^2 + e^t k^2 |c^|^2.
double mode_energy(LinearSystemKind kind, int k, double t, const Mat& phi,
                   int col, int d) {
  if (kind == LinearSystemKind::ks_wellposed) {
    const double kk = static_cast<double>(k) * k;
    return std::norm(phi[0][static_cast<std::size_t>(col)]) +
           std::exp(t) * kk * std::norm(phi[1][static_cast<std::size_t>(col)]);
  }
  double e = 0.0;
  for (int i = 0; i < d; ++i) e += std::norm(phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(col)]);
  return e;
}

// Operator norm of phi between the energy metrics at times 0 and T:
// ||W(T)^{1/2} phi W(0)^{-1/2}||. Identity weights reduce to spectral_norm.
// The well-posed weight diag(1, e^t k^2) is singular at k = 0, where the
// energy sees only the density component: the norm of the restriction is
// |phi_00|.
double energy_norm(LinearSystemKind kind, int k, double T, const Mat& phi,
                   int d) {
  if (kind != LinearSystemKind::ks_wellposed) return spectral_norm(phi, d);
  if (k == 0) return std::abs(phi[0][0]);
  Mat w = phi;
  const double row1 = std::exp(T / 2.0) * k;
  const double col1 = 1.0 / k;
  w[1][0] *= row1;
  w[1][1] *= row1;
  w[0][1] *= col1;
  w[1][1] *= col1;
  return spectral_norm(w, 2);
}

struct FitLine {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

FitLine least_squares(const std::vector<int>& xs, const std::vector<double>& ys) {
  const double n = static_cast<double>(xs.size());
  double sx = 0.0, sy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  FitLine f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss_res = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (f.slope * xs[i] + f.intercept);
    ss_res += r * r;
  }
  f.r2 = syy > 1e-30 ? 1.0 - ss_res / syy : 0.0;
  return f;
}

}  // namespace

std::string to_string(LinearSystemKind kind) {
  switch (kind) {
    case LinearSystemKind::ks_wellposed: return "ks_wellposed";
    case LinearSystemKind::ks_illposed_c: return "ks_illposed_c";
    case LinearSystemKind::ks_illposed_rho: return "ks_illposed_rho";
    case LinearSystemKind::ksf1d: return "ksf1d";
    case LinearSystemKind::ksf1d_good: return "ksf1d_good";
  }
  throw std::invalid_argument("unknown linear system kind");
}

LinearSystemKind parse_linear_kind(const std::string& name) {
  if (name == "ks_wellposed") return LinearSystemKind::ks_wellposed;
  if (name == "ks_illposed_c") return LinearSystemKind::ks_illposed_c;
  if (name == "ks_illposed_rho") return LinearSystemKind::ks_illposed_rho;
  if (name == "ksf1d") return LinearSystemKind::ksf1d;
  if (name == "ksf1d_good") return LinearSystemKind::ksf1d_good;
  throw std::invalid_argument("unknown linear system kind: " + name);
}

int linear_dimension(LinearSystemKind kind) {
  switch (kind) {
    case LinearSystemKind::ks_wellposed:
    case LinearSystemKind::ks_illposed_c:
    case LinearSystemKind::ks_illposed_rho:
      return 2;
    case LinearSystemKind::ksf1d:
    case LinearSystemKind::ksf1d_good:
      return 3;
  }
  throw std::invalid_argument("unknown linear system kind");
}

ModeMatrix mode_matrix(LinearSystemKind kind, int k, double t) {
  if (k < 0) throw std::invalid_argument("wavenumber must be non-negative");
  const double kk = static_cast<double>(k) * k;
  const cplx mik(0.0, -static_cast<double>(k));
  ModeMatrix m;
  m.dim = linear_dimension(kind);
  switch (kind) {
    case LinearSystemKind::ks_wellposed:
      m(0, 1) = kk;
      m(1, 0) = -std::exp(-t);
      m(1, 1) = -1.0;
      break;
    case LinearSystemKind::ks_illposed_c:
      m(0, 1) = kk;
      m(1, 0) = std::exp(t);
      m(1, 1) = 1.0;
      break;
    case LinearSystemKind::ks_illposed_rho:
      m(0, 1) = kk;
      m(1, 0) = 1.0;
      break;
    case LinearSystemKind::ksf1d:
      m(0, 0) = 2.0 * mik;
      m(0, 1) = mik;
      m(1, 0) = mik;
      m(1, 1) = mik;
      m(1, 2) = mik;
      m(2, 2) = mik;
      break;
    case LinearSystemKind::ksf1d_good:
      m(0, 0) = 2.0 * mik;
      m(0, 1) = mik;
      m(1, 0) = mik;
      m(1, 1) = mik;
      m(2, 2) = mik;
      break;
  }
  return m;
}

ModeAmplification mode_amplification(LinearSystemKind kind, int k, double T,
                                     double dt) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon T must be positive");
  const int d = linear_dimension(kind);
  if (dt <= 0.0) {
    dt = std::min(1e-3, 0.1 / (std::max(k, 1) * std::exp(T / 2.0)));
  }
  const long steps = std::max(1L, std::lround(std::ceil(T / dt - 1e-12)));
  dt = T / static_cast<double>(steps);

  Mat phi{};
  for (int i = 0; i < d; ++i) phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;

  std::array<double, 3> e0{};
  std::array<double, 3> eprev{};
  for (int col = 0; col < d; ++col) {
    e0[static_cast<std::size_t>(col)] = eprev[static_cast<std::size_t>(col)] =
        mode_energy(kind, k, 0.0, phi, col, d);
  }

  ModeAmplification res;
  double log_scale = 0.0;

  Mat k1{}, k2{}, k3{}, k4{}, stage{};
  for (long s = 0; s < steps; ++s) {
    const double t = static_cast<double>(s) * dt;
    mat_mul(mode_matrix(kind, k, t).a, phi, d, k1);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        stage[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] + 0.5 * dt * k1[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    mat_mul(mode_matrix(kind, k, t + 0.5 * dt).a, stage, d, k2);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        stage[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] + 0.5 * dt * k2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    mat_mul(mode_matrix(kind, k, t + 0.5 * dt).a, stage, d, k3);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        stage[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] + dt * k3[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    mat_mul(mode_matrix(kind, k, t + dt).a, stage, d, k4);
    for (int i = 0; i < d; ++i) {
      for (int j = 0; j < d; ++j) {
        phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            dt / 6.0 *
            (k1[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] + 2.0 * k2[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +
             2.0 * k3[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] + k4[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      }
    }
    const double tn = static_cast<double>(s + 1) * dt;

    double amax = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j)
        amax = std::max(amax, std::abs(phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    if (!std::isfinite(amax)) {
      res.overflow = true;
      res.amplification = std::numeric_limits<double>::infinity();
      res.log_amplification = std::numeric_limits<double>::infinity();
      res.energy_amplification = res.amplification;
      res.log_energy_amplification = res.log_amplification;
      return res;
    }

    for (int col = 0; col < d; ++col) {
      const double e = mode_energy(kind, k, tn, phi, col, d);
      const double inc = (e - eprev[static_cast<std::size_t>(col)]) /
                         std::max(e0[static_cast<std::size_t>(col)], 1e-300);
      res.worst_energy_increase = std::max(res.worst_energy_increase, inc);
      eprev[static_cast<std::size_t>(col)] = e;
    }

    // Rescale long before the representable range runs out; energies carry
    // the square of the scale so ratios and increments are unchanged.
    if (amax > 1e140) {
      log_scale += std::log(amax);
      const double s1 = 1.0 / amax;
      const double s2 = s1 * s1;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) phi[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *= s1;
      for (int col = 0; col < d; ++col) {
        eprev[static_cast<std::size_t>(col)] *= s2;
        e0[static_cast<std::size_t>(col)] *= s2;
      }
    }
  }

  res.log_amplification = std::log(spectral_norm(phi, d)) + log_scale;
  res.log_energy_amplification = std::log(energy_norm(kind, k, T, phi, d)) + log_scale;
  if (res.log_amplification < 709.0) {
    res.amplification = std::exp(res.log_amplification);
  } else {
    res.amplification = std::numeric_limits<double>::infinity();
    res.overflow = true;
  }
  res.energy_amplification = res.log_energy_amplification < 709.0
                                 ? std::exp(res.log_energy_amplification)
                                 : std::numeric_limits<double>::infinity();
  for (int col = 0; col < d; ++col) {
    res.energy_ratio = std::max(res.energy_ratio,
                                eprev[static_cast<std::size_t>(col)] /
                                    std::max(e0[static_cast<std::size_t>(col)], 1e-300));
  }
  return res;
}

SlopeFit illposedness_slope(LinearSystemKind kind, const std::vector<int>& ks,
                            double T, double dt) {
  if (ks.size() < 4) throw std::invalid_argument("need at least four wavenumbers");
  for (std::size_t i = 0; i + 1 < ks.size(); ++i) {
    if (ks[i + 1] <= ks[i]) {
      throw std::invalid_argument("wavenumbers must be strictly increasing");
    }
  }
  std::vector<std::future<ModeAmplification>> futs;
  futs.reserve(ks.size());
  for (const int k : ks) {
    futs.push_back(std::async(std::launch::async, [kind, k, T, dt] {
      return mode_amplification(kind, k, T, dt);
    }));
  }
  SlopeFit fit;
  for (auto& f : futs) {
    const ModeAmplification a = f.get();
    fit.log_amps.push_back(a.log_amplification);
    fit.log_energy_amps.push_back(a.log_energy_amplification);
  }
  // Growth that is not (weakly) monotone in k signals an oscillation-dominated
  // regime the regression cannot interpret; 1e-3 of slack absorbs integrator
  // noise on flat (unit-amplification) data.
  for (std::size_t i = 0; i + 1 < fit.log_amps.size(); ++i) {
    if (fit.log_amps[i + 1] < fit.log_amps[i] - 1e-3) {
      throw std::runtime_error("non-monotone amplification");
    }
  }
  const FitLine eu = least_squares(ks, fit.log_amps);
  fit.slope = eu.slope;
  fit.intercept = eu.intercept;
  fit.r2 = eu.r2;
  fit.energy_slope = least_squares(ks, fit.log_energy_amps).slope;
  return fit;
}

std::array<cplx, 3> good_variable_transform(const std::array<cplx, 3>& v) {
  return {v[0] + v[2], v[1] - v[2], v[2]};
}

std::array<cplx, 3> good_variable_inverse(const std::array<cplx, 3>& v) {
  return {v[0] - v[2], v[1] + v[2], v[2]};
}

ModeMatrix good_transform_matrix() {
  ModeMatrix t;
  t.dim = 3;
  t(0, 0) = 1.0;
  t(0, 2) = 1.0;
  t(1, 1) = 1.0;
  t(1, 2) = -1.0;
  t(2, 2) = 1.0;
  return t;
}

ModeMatrix good_transform_inverse_matrix() {
  ModeMatrix t;
  t.dim = 3;
  t(0, 0) = 1.0;
  t(0, 2) = -1.0;
  t(1, 1) = 1.0;
  t(1, 2) = 1.0;
  t(2, 2) = 1.0;
  return t;
}

ModeMatrix conjugate_ksf1d(int k, double t) {
  const ModeMatrix m = mode_matrix(LinearSystemKind::ksf1d, k, t);
  Mat tmp{};
  mat_mul(good_transform_matrix().a, m.a, 3, tmp);
  ModeMatrix out;
  out.dim = 3;
  mat_mul(tmp, good_transform_inverse_matrix().a, 3, out.a);
  return out;
}

void write_mode_csv(std::ostream& os, LinearSystemKind kind,
                    const std::vector<int>& ks, double T, double dt) {
  os << "kind,k,T,log_amplification,energy_ratio\n";
  os << std::setprecision(17);
  for (const int k : ks) {
    const ModeAmplification a = mode_amplification(kind, k, T, dt);
    os << to_string(kind) << ',' << k << ',' << T << ','
       << a.log_amplification << ',' << a.energy_ratio << '\n';
  }
}

}  // namespace kslab
