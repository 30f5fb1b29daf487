#include "kslab/grid.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace kslab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Kahan compensated summation: deterministic (fixed order) and keeps the
// quadrature error independent of the point count.
struct KahanSum {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double y = x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
};

// (i*k)^p by repeated multiplication; p is a small derivative order.
fft::cplx ik_power(double k, int p) {
  const fft::cplx ik{0.0, k};
  fft::cplx r{1.0, 0.0};
  for (int q = 0; q < p; ++q) r *= ik;
  return r;
}

// Runs 1D transforms over every line of the field along `axis`.
void transform_axis(Spectrum& s, int axis, int sign) {
  const int n = s.grid.n;
  std::vector<fft::cplx> scratch;
  for (int comp = 0; comp < s.components; ++comp) {
    fft::cplx* base = s.data(comp);
    if (s.grid.dim == 1) {
      fft::transform(base, static_cast<std::size_t>(n), sign);
      continue;
    }
    if (axis == 1) {  // contiguous lines
      for (int i0 = 0; i0 < n; ++i0)
        fft::transform(base + static_cast<std::size_t>(i0) * n, static_cast<std::size_t>(n), sign);
    } else {  // strided lines
      for (int i1 = 0; i1 < n; ++i1)
        fft::transform_strided(base + i1, static_cast<std::size_t>(n),
                               static_cast<std::size_t>(n), sign, scratch);
    }
  }
}

}  // namespace

double Grid::wavenumber(int j) const {
  return kTwoPi / length * static_cast<double>(mode(j));
}

Grid make_grid(int dim, int n, double length) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("dim must be 1 or 2");
  if (n % 2 != 0) throw std::invalid_argument("n must be even");
  if (n < 8) throw std::invalid_argument("n must be at least 8");
  if (!(length > 0.0)) throw std::invalid_argument("length must be positive");
  return Grid{dim, n, length};
}

Grid make_grid(int dim, int n) { return make_grid(dim, n, kTwoPi); }

Field make_field(const Grid& g, int components, double fill) {
  Field f;
  f.grid = g;
  f.components = components;
  f.values.assign(static_cast<std::size_t>(components) * g.points(), fill);
  return f;
}

Field sample(const Grid& g, int components,
             const std::function<double(const std::array<double, 2>&, int)>& f) {
  Field out = make_field(g, components);
  const int n = g.n;
  for (int comp = 0; comp < components; ++comp) {
    if (g.dim == 1) {
      for (int i = 0; i < n; ++i) out.at(comp, static_cast<std::size_t>(i)) = f({g.coord(i), 0.0}, comp);
    } else {
      for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1)
          out.at(comp, static_cast<std::size_t>(i0) * n + i1) = f({g.coord(i0), g.coord(i1)}, comp);
    }
  }
  return out;
}

Field sample(const Grid& g, const std::function<double(const std::array<double, 2>&)>& f) {
  return sample(g, 1, [&f](const std::array<double, 2>& x, int) { return f(x); });
}

bool has_nonfinite(const Field& f) {
  for (double v : f.values)
    if (!std::isfinite(v)) return true;
  return false;
}

Spectrum forward(const Field& f) {
  Spectrum s;
  s.grid = f.grid;
  s.components = f.components;
  s.values.resize(f.values.size());
  for (std::size_t i = 0; i < f.values.size(); ++i) s.values[i] = fft::cplx{f.values[i], 0.0};
  transform_axis(s, 1, -1);
  if (f.grid.dim == 2) transform_axis(s, 0, -1);
  const double scale = 1.0 / static_cast<double>(f.grid.points());
  for (auto& v : s.values) v *= scale;
  return s;
}

Field inverse(const Spectrum& s) {
  Spectrum work = s;
  transform_axis(work, 1, +1);
  if (s.grid.dim == 2) transform_axis(work, 0, +1);
  Field f = make_field(s.grid, s.components);
  for (std::size_t i = 0; i < f.values.size(); ++i) f.values[i] = work.values[i].real();
  return f;
}

void apply_derivative(Spectrum& s, const std::array<int, 2>& alpha) {
  const Grid& g = s.grid;
  const int n = g.n;
  const int nyq = n / 2;
  for (int comp = 0; comp < s.components; ++comp) {
    fft::cplx* base = s.data(comp);
    if (g.dim == 1) {
      for (int j = 0; j < n; ++j) {
        if (alpha[0] % 2 == 1 && j == nyq) {
          base[j] = fft::cplx{0.0, 0.0};
        } else {
          base[j] *= ik_power(g.wavenumber(j), alpha[0]);
        }
      }
    } else {
      for (int j0 = 0; j0 < n; ++j0) {
        const bool kill0 = alpha[0] % 2 == 1 && j0 == nyq;
        const fft::cplx f0 = kill0 ? fft::cplx{0.0, 0.0} : ik_power(g.wavenumber(j0), alpha[0]);
        for (int j1 = 0; j1 < n; ++j1) {
          const bool kill1 = alpha[1] % 2 == 1 && j1 == nyq;
          if (kill0 || kill1) {
            base[static_cast<std::size_t>(j0) * n + j1] = fft::cplx{0.0, 0.0};
          } else {
            base[static_cast<std::size_t>(j0) * n + j1] *= f0 * ik_power(g.wavenumber(j1), alpha[1]);
          }
        }
      }
    }
  }
}

Field derivative(const Field& f, const std::array<int, 2>& alpha) {
  Spectrum s = forward(f);
  apply_derivative(s, alpha);
  return inverse(s);
}

void apply_dealias(Spectrum& s) {
  const Grid& g = s.grid;
  const int n = g.n;
  // |k| > n/3  <=>  3*|k| > n, exact in integer arithmetic.
  auto cut = [n](int j, const Grid& gr) { return 3 * std::abs(gr.mode(j)) > n; };
  for (int comp = 0; comp < s.components; ++comp) {
    fft::cplx* base = s.data(comp);
    if (g.dim == 1) {
      for (int j = 0; j < n; ++j)
        if (cut(j, g)) base[j] = fft::cplx{0.0, 0.0};
    } else {
      for (int j0 = 0; j0 < n; ++j0) {
        const bool cut0 = cut(j0, g);
        for (int j1 = 0; j1 < n; ++j1)
          if (cut0 || cut(j1, g)) base[static_cast<std::size_t>(j0) * n + j1] = fft::cplx{0.0, 0.0};
      }
    }
  }
}

Field dealias(const Field& f) {
  Spectrum s = forward(f);
  apply_dealias(s);
  return inverse(s);
}

double integrate(const Field& f, int comp) {
  KahanSum acc;
  const double* p = f.data(comp);
  const std::size_t np = f.grid.points();
  for (std::size_t i = 0; i < np; ++i) acc.add(p[i]);
  double weight = f.grid.spacing();
  if (f.grid.dim == 2) weight *= f.grid.spacing();
  return weight * acc.sum;
}

ReduceResult reduce(const Field& f, Reduce op, int comp) {
  const double* p = f.data(comp);
  const std::size_t np = f.grid.points();
  ReduceResult r;
  r.index = 0;
  switch (op) {
    case Reduce::sup: r.value = p[0]; break;
    case Reduce::inf: r.value = p[0]; break;
    case Reduce::sup_abs: r.value = std::abs(p[0]); break;
  }
  for (std::size_t i = 1; i < np; ++i) {
    double v = op == Reduce::sup_abs ? std::abs(p[i]) : p[i];
    const bool better = (op == Reduce::inf) ? v < r.value : v > r.value;
    if (better) {  // strict comparison keeps the first attaining index
      r.value = v;
      r.index = i;
    }
  }
  return r;
}

Field gradient(const Field& f, int comp) {
  const Grid& g = f.grid;
  Field single = make_field(g, 1);
  std::copy(f.data(comp), f.data(comp) + g.points(), single.data(0));
  Spectrum s = forward(single);
  Field out = make_field(g, g.dim);
  for (int axis = 0; axis < g.dim; ++axis) {
    Spectrum ds = s;
    std::array<int, 2> alpha{0, 0};
    alpha[axis] = 1;
    apply_derivative(ds, alpha);
    Field comp_field = inverse(ds);
    std::copy(comp_field.data(0), comp_field.data(0) + g.points(), out.data(axis));
  }
  return out;
}

Field laplacian(const Field& f) {
  Spectrum s = forward(f);
  const Grid& g = f.grid;
  const int n = g.n;
  for (int comp = 0; comp < s.components; ++comp) {
    fft::cplx* base = s.data(comp);
    if (g.dim == 1) {
      for (int j = 0; j < n; ++j) {
        const double k = g.wavenumber(j);
        base[j] *= -k * k;
      }
    } else {
      for (int j0 = 0; j0 < n; ++j0) {
        const double k0 = g.wavenumber(j0);
        for (int j1 = 0; j1 < n; ++j1) {
          const double k1 = g.wavenumber(j1);
          base[static_cast<std::size_t>(j0) * n + j1] *= -(k0 * k0 + k1 * k1);
        }
      }
    }
  }
  return inverse(s);
}

Field divergence(const Field& f) {
  const Grid& g = f.grid;
  Field out = make_field(g, 1);
  for (int axis = 0; axis < g.dim; ++axis) {
    Field single = make_field(g, 1);
    std::copy(f.data(axis), f.data(axis) + g.points(), single.data(0));
    std::array<int, 2> alpha{0, 0};
    alpha[axis] = 1;
    Field d = derivative(single, alpha);
    for (std::size_t i = 0; i < g.points(); ++i) out.values[i] += d.values[i];
  }
  return out;
}

double inner(const Field& a, const Field& b) {
  if (a.grid != b.grid || a.components != b.components)
    throw std::invalid_argument("inner: mismatched fields");
  KahanSum acc;
  for (std::size_t i = 0; i < a.values.size(); ++i) acc.add(a.values[i] * b.values[i]);
  double weight = a.grid.spacing();
  if (a.grid.dim == 2) weight *= a.grid.spacing();
  return weight * acc.sum;
}

double l2_norm(const Field& f) { return std::sqrt(inner(f, f)); }

double spectral_tail_fraction(const Field& f, int comp) {
  Field single = make_field(f.grid, 1);
  std::copy(f.data(comp), f.data(comp) + f.grid.points(), single.data(0));
  Spectrum s = forward(single);
  const Grid& g = f.grid;
  const int n = g.n;
  auto cut = [n, &g](int j) { return 3 * std::abs(g.mode(j)) > n; };
  double tail = 0.0, total = 0.0;
  const fft::cplx* base = s.data(0);
  if (g.dim == 1) {
    for (int j = 0; j < n; ++j) {
      const double e = std::norm(base[j]);
      total += e;
      if (cut(j)) tail += e;
    }
  } else {
    for (int j0 = 0; j0 < n; ++j0)
      for (int j1 = 0; j1 < n; ++j1) {
        const double e = std::norm(base[static_cast<std::size_t>(j0) * n + j1]);
        total += e;
        if (cut(j0) || cut(j1)) tail += e;
      }
  }
  return total > 0.0 ? tail / total : 0.0;
}

}  // namespace kslab
