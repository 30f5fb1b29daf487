#pragma once

// Per-Fourier-mode analysis of the linearised consumption systems.
//
// Around spatially homogeneous backgrounds the linearised dynamics decouple in
// Fourier space into independent low-dimensional ODE systems, one per
// wavenumber k.  The sign of the chemotaxis/consumption coupling decides
// everything:
//
//   ks_wellposed   state (rho^, c^) around rho = 1, c = e^{-t}:
//                    d/dt rho^ =  k^2 c^
//                    d/dt c^   = -e^{-t} rho^ - c^
//     The weighted energy E_k(t) = |rho^|^2 + e^t k^2 |c^|^2 is non-increasing
//     along solutions, so every mode is stable uniformly in k.
//
//   ks_illposed_c  the signs of both couplings flipped (production instead of
//     consumption): d/dt rho^ = k^2 c^, d/dt c^ = e^t rho^ + c^.  The frozen
//     eigenvalue of the instantaneous matrix is ~ k e^{t/2}, so the
//     amplification over [0,T] behaves like exp(2k(e^{T/2}-1)) -- exponential
//     in k at fixed T, the signature of Hadamard (Laplace-type) ill-posedness.
//
//   ks_illposed_rho  only the chemotactic sign in the density equation is
//     flipped; the natural background for the production equation d/dt c = rho
//     is (rho, c) = (1, 1+t), whose linearisation has the time-independent
//     matrix [[0, k^2], [1, 0]] with eigenvalues +-k: again exponential-in-k
//     growth.  (The linearisation around this background is our derivation;
//     see the module tests for the directional-derivative verification.)
//
//   ksf1d          inviscid fluid-coupled 1D linearisation in the state
//     (rho^, f^, u^), f = dx c:  M(k) = -ik [[2,1,0],[1,1,1],[0,0,1]].
//     The matrix is not normal; amplification stays bounded in k but exceeds 1.
//
//   ksf1d_good     the same system written in the good variables
//     (rho+u, f-u, u):  M(k) = -ik [[2,1,0],[1,1,0],[0,0,1]] is
//     skew-Hermitian, the propagator is unitary, and the amplification is
//     exactly 1 for every mode -- the change of variables removes the
//     apparent growth.
//
// Amplification is measured in the unweighted Euclidean norm of the mode
// vector; the weighted energy is reported as a separate observable.  The
// well-posed kind therefore shows bounded-but-not-contracting Euclidean
// behaviour (operator norm ~ k from the energy weight) while its weighted
// energy contracts; the ill-posed kinds grow exponentially in k in any norm.

#include <array>
#include <complex>
#include <iosfwd>
#include <string>
#include <vector>

namespace kslab {

enum class LinearSystemKind {
  ks_wellposed,
  ks_illposed_c,
  ks_illposed_rho,
  ksf1d,
  ksf1d_good,
};

std::string to_string(LinearSystemKind kind);

/// Parses the names listed above. Throws std::invalid_argument otherwise.
LinearSystemKind parse_linear_kind(const std::string& name);

/// State dimension of the per-mode system: 2 for the scalar kinds, 3 for the
/// fluid-coupled ones.
int linear_dimension(LinearSystemKind kind);

/// Dense complex matrix of the per-mode ODE, stored as the top-left dim x dim
/// block of a fixed 3x3 array.
struct ModeMatrix {
  int dim = 0;
  std::array<std::array<std::complex<double>, 3>, 3> a{};

  std::complex<double>& operator()(int i, int j) { return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
  std::complex<double> operator()(int i, int j) const { return a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; }
};

/// Coefficient matrix of the Fourier-mode ODE d/dt y = M(t) y for wavenumber
/// k >= 0 at time t. Throws std::invalid_argument for negative k.
ModeMatrix mode_matrix(LinearSystemKind kind, int k, double t);

/// Result of integrating the fundamental matrix Phi over [0, T], Phi(0) = I.
struct ModeAmplification {
  /// Operator (spectral) norm of Phi(T); +infinity when `overflow` is set.
  double amplification = 0.0;
  /// log of the same, kept finite by internal rescaling of Phi, so slopes can
  /// be fitted even deep in the ill-posed regime.
  double log_amplification = 0.0;
  /// Operator norm of Phi(T) measured between the weighted-energy metrics at
  /// times 0 and T (identity weight for all kinds except ks_wellposed, whose
  /// energy is |rho^|^2 + e^t k^2 |c^|^2).
  double energy_amplification = 0.0;
  double log_energy_amplification = 0.0;
  /// Worst final/initial energy ratio over the canonical starting vectors.
  double energy_ratio = 0.0;
  /// Largest single-step energy increase relative to the starting energy,
  /// maximised over steps and canonical starting vectors. A well-posed mode
  /// must keep this at roundoff level (its energy is non-increasing).
  double worst_energy_increase = 0.0;
  bool overflow = false;
};

/// Integrates the fundamental matrix with classical RK4 at fixed step dt.
/// dt <= 0 picks the resolution rule dt = min(1e-3, 0.1 / (max(k,1) e^{T/2})),
/// small enough that the oscillation frequency ~ k e^{t/2} of the stiffest
/// kind is resolved. Throws std::invalid_argument for T <= 0.
ModeAmplification mode_amplification(LinearSystemKind kind, int k, double T,
                                     double dt = 0.0);

/// Least-squares fit of log amplification against wavenumber.
struct SlopeFit {
  std::vector<double> log_amps;         // one per requested wavenumber
  std::vector<double> log_energy_amps;  // same, in the weighted-energy metric
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// Regression slope of the weighted-energy log amplification. Bounded near
  /// zero for the well-posed kind even though the Euclidean slope is not.
  double energy_slope = 0.0;
};

/// Regresses log ||Phi_k(T)|| on k over the given wavenumbers (at least four,
/// strictly increasing). An exponentially ill-posed kind produces a straight
/// line whose slope estimates the frozen-eigenvalue integral
/// int_0^T k e^{s/2} ds / k = 2(e^{T/2}-1). Throws std::runtime_error
/// "non-monotone amplification" if the Euclidean log amplifications decrease
/// by more than 1e-3 between consecutive wavenumbers (T too small to separate
/// growth from oscillation). Modes are integrated in parallel.
SlopeFit illposedness_slope(LinearSystemKind kind, const std::vector<int>& ks,
                            double T, double dt = 0.0);

/// Good-variable change of basis (rho^, f^, u^) -> (rho^+u^, f^-u^, u^) and
/// its inverse. Exact linear bijection.
std::array<std::complex<double>, 3> good_variable_transform(
    const std::array<std::complex<double>, 3>& v);
std::array<std::complex<double>, 3> good_variable_inverse(
    const std::array<std::complex<double>, 3>& v);

/// The change of basis as matrices, and the conjugated generator
/// T * mode_matrix(ksf1d, k, t) * T^{-1}. All entries are integer multiples
/// of ik, so the conjugation is exact in floating point; it reproduces
/// mode_matrix(ksf1d_good, k, t) with the (3,1) and (3,2) entries exactly
/// zero (the velocity mode decouples).
ModeMatrix good_transform_matrix();
ModeMatrix good_transform_inverse_matrix();
ModeMatrix conjugate_ksf1d(int k, double t);

/// Writes "kind,k,T,log_amplification,energy_ratio" rows for each wavenumber.
void write_mode_csv(std::ostream& os, LinearSystemKind kind,
                    const std::vector<int>& ks, double T, double dt = 0.0);

}  // namespace kslab
