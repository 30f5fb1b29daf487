#pragma once

// Deterministic complex FFT used by the spectral grid operations.
//
// Two paths: an iterative radix-2 Cooley-Tukey for power-of-two sizes and a
// Bluestein chirp-z wrapper for the remaining even sizes. Twiddle/chirp tables
// are immutable once built and cached per size, so transforms are thread-safe
// and bitwise reproducible across runs and thread counts.

#include <complex>
#include <cstddef>
#include <vector>

namespace kslab::fft {

using cplx = std::complex<double>;

/// In-place complex DFT of length n on `data` with stride 1.
/// sign = -1: forward (e^{-ikx} convention), sign = +1: inverse WITHOUT the
/// 1/n normalisation (callers scale explicitly).
void transform(cplx* data, std::size_t n, int sign);

/// Strided wrapper: transforms `count` interleaved sequences of length n,
/// where element j of sequence s lives at data[offset(s) + j*stride].
/// Used to run 1D transforms along a non-contiguous axis of a 2D field.
void transform_strided(cplx* data, std::size_t n, std::size_t stride, int sign,
                       std::vector<cplx>& scratch);

/// True if n is a power of two (n >= 1).
bool is_pow2(std::size_t n);

}  // namespace kslab::fft
