#pragma once

// Periodic uniform grids on [0, L)^d (d = 1 or 2) and fields sampled on them,
// plus the Fourier-side primitives everything else is built from: forward and
// inverse transforms, spectral derivatives, 2/3-rule dealiasing, quadrature,
// and pointwise reductions.

#include <array>
#include <cstddef>
#include <functional>
#include <vector>

#include "kslab/fft.hpp"

namespace kslab {

/// Uniform periodic grid. Same resolution n along every axis.
struct Grid {
  int dim = 1;         ///< 1 or 2
  int n = 0;           ///< points per axis; even, at least 8
  double length = 0.0; ///< edge length of the periodic box

  double spacing() const { return length / static_cast<double>(n); }
  std::size_t points() const {
    return dim == 1 ? static_cast<std::size_t>(n)
                    : static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
  }
  /// Coordinate of index i along any axis: x_i = i * spacing.
  double coord(int i) const { return spacing() * static_cast<double>(i); }
  /// Signed integer mode for storage index j: j <= n/2 -> j, else j - n.
  /// The Nyquist slot n/2 is assigned +n/2.
  int mode(int j) const { return j <= n / 2 ? j : j - n; }
  /// Physical wavenumber 2*pi*mode/length for storage index j.
  double wavenumber(int j) const;

  bool operator==(const Grid&) const = default;
};

/// Validates and builds a grid. Throws std::invalid_argument with messages
/// "dim must be 1 or 2", "n must be even", "n must be at least 8",
/// "length must be positive".
Grid make_grid(int dim, int n, double length);
Grid make_grid(int dim, int n);  // length = 2*pi

/// Real-valued field: `components` blocks of grid.points() doubles.
/// Within a block storage is row-major: index = i0*n + i1 in 2D (axis 1
/// contiguous), index = i0 in 1D.
struct Field {
  Grid grid;
  int components = 1;
  std::vector<double> values;

  double& at(int comp, std::size_t idx) { return values[static_cast<std::size_t>(comp) * grid.points() + idx]; }
  double at(int comp, std::size_t idx) const { return values[static_cast<std::size_t>(comp) * grid.points() + idx]; }
  double* data(int comp) { return values.data() + static_cast<std::size_t>(comp) * grid.points(); }
  const double* data(int comp) const { return values.data() + static_cast<std::size_t>(comp) * grid.points(); }
};

Field make_field(const Grid& g, int components = 1, double fill = 0.0);

/// Samples f(x, comp) at the grid points. x has grid.dim meaningful entries.
Field sample(const Grid& g, int components,
             const std::function<double(const std::array<double, 2>&, int)>& f);
Field sample(const Grid& g, const std::function<double(const std::array<double, 2>&)>& f);

/// True if any entry is NaN or infinite.
bool has_nonfinite(const Field& f);

/// Complex Fourier coefficients of a Field, same layout (mode index j along
/// each axis as in Grid::mode), normalised so that inverse(forward(f)) == f.
struct Spectrum {
  Grid grid;
  int components = 1;
  std::vector<fft::cplx> values;

  fft::cplx& at(int comp, std::size_t idx) { return values[static_cast<std::size_t>(comp) * grid.points() + idx]; }
  fft::cplx at(int comp, std::size_t idx) const { return values[static_cast<std::size_t>(comp) * grid.points() + idx]; }
  fft::cplx* data(int comp) { return values.data() + static_cast<std::size_t>(comp) * grid.points(); }
  const fft::cplx* data(int comp) const { return values.data() + static_cast<std::size_t>(comp) * grid.points(); }
};

Spectrum forward(const Field& f);
/// Real part of the inverse transform (imaginary residue is discarded).
Field inverse(const Spectrum& s);

/// Multiplies each mode by prod_a (i k_a)^{alpha_a}. For every axis with odd
/// alpha_a the Nyquist plane of that axis is zeroed: the +n/2 mode has no
/// signed counterpart, and an odd power of (ik) would otherwise leave a
/// spurious imaginary residue on real input.
void apply_derivative(Spectrum& s, const std::array<int, 2>& alpha);

/// Spectral partial derivative of order alpha (multi-index, one entry per axis).
Field derivative(const Field& f, const std::array<int, 2>& alpha);

/// Zeroes every mode with |k_a| > n/3 on any axis (2/3-rule truncation for
/// quadratically nonlinear products).
void apply_dealias(Spectrum& s);
Field dealias(const Field& f);

/// Rectangle-rule quadrature of one component: spacing^dim * sum of values.
/// Exact for trigonometric polynomials below the Nyquist degree.
double integrate(const Field& f, int comp = 0);

enum class Reduce { sup, inf, sup_abs };
struct ReduceResult {
  double value = 0.0;
  std::size_t index = 0;  ///< first attaining index in row-major order
};
ReduceResult reduce(const Field& f, Reduce op, int comp = 0);

/// Gradient of a scalar component: Field with grid.dim components.
Field gradient(const Field& f, int comp = 0);
/// Laplacian of every component.
Field laplacian(const Field& f);
/// Divergence of a vector field with grid.dim components.
Field divergence(const Field& f);

/// L2 inner product / norm with the rectangle quadrature weight.
double inner(const Field& a, const Field& b);
double l2_norm(const Field& f);

/// Fraction of the spectral energy of a component carried by modes with
/// |k_a| > n/3 on some axis. A resolved smooth field keeps this near roundoff;
/// values above ~1e-6 signal the grid no longer resolves the solution.
double spectral_tail_fraction(const Field& f, int comp = 0);

}  // namespace kslab
