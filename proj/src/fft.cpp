#include "kslab/fft.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace kslab::fft {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Per-size immutable tables. Built once under a mutex, then read-only.
struct Pow2Tables {
  std::vector<std::size_t> bitrev;     // bit-reversal permutation
  std::vector<cplx> twiddle_forward;   // e^{-2pi i j / n}, j < n/2
};

struct BluesteinTables {
  std::size_t m = 0;                   // padded power-of-two size >= 2n-1
  std::vector<cplx> chirp;             // a_j = e^{-i pi j^2 / n}, j < n
  std::vector<cplx> kernel_fft;        // FFT_m of b_j = conj(chirp) extended
};

// Separate mutexes: building a Bluestein table runs power-of-two FFTs, which
// take the pow2 lock; sharing one mutex would self-deadlock.
std::mutex pow2_mutex;
std::mutex bluestein_mutex;
std::unordered_map<std::size_t, Pow2Tables> pow2_cache;
std::unordered_map<std::size_t, BluesteinTables> bluestein_cache;

const Pow2Tables& pow2_tables(std::size_t n) {
  std::lock_guard<std::mutex> lock(pow2_mutex);
  auto it = pow2_cache.find(n);
  if (it != pow2_cache.end()) return it->second;
  Pow2Tables t;
  t.bitrev.resize(n);
  std::size_t log2n = 0;
  while ((std::size_t{1} << log2n) < n) ++log2n;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t r = 0;
    for (std::size_t b = 0; b < log2n; ++b)
      if (i & (std::size_t{1} << b)) r |= std::size_t{1} << (log2n - 1 - b);
    t.bitrev[i] = r;
  }
  t.twiddle_forward.resize(n / 2);
  for (std::size_t j = 0; j < n / 2; ++j) {
    const double ang = -kTwoPi * static_cast<double>(j) / static_cast<double>(n);
    t.twiddle_forward[j] = {std::cos(ang), std::sin(ang)};
  }
  return pow2_cache.emplace(n, std::move(t)).first->second;
}

void fft_pow2(cplx* data, std::size_t n, int sign) {
  if (n <= 1) return;
  const Pow2Tables& t = pow2_tables(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = t.bitrev[i];
    if (i < r) std::swap(data[i], data[r]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len >> 1;
    const std::size_t step = n / len;
    for (std::size_t start = 0; start < n; start += len) {
      for (std::size_t j = 0; j < half; ++j) {
        cplx w = t.twiddle_forward[j * step];
        if (sign > 0) w = std::conj(w);
        const cplx odd = data[start + j + half] * w;
        const cplx even = data[start + j];
        data[start + j] = even + odd;
        data[start + j + half] = even - odd;
      }
    }
  }
}

const BluesteinTables& bluestein_tables(std::size_t n) {
  std::lock_guard<std::mutex> lock(bluestein_mutex);
  auto it = bluestein_cache.find(n);
  if (it != bluestein_cache.end()) return it->second;
  BluesteinTables t;
  std::size_t m = 1;
  while (m < 2 * n - 1) m <<= 1;
  t.m = m;
  t.chirp.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    // j^2 mod 2n keeps the phase argument small and exact.
    const std::size_t j2 = (j * j) % (2 * n);
    const double ang = -std::numbers::pi * static_cast<double>(j2) / static_cast<double>(n);
    t.chirp[j] = {std::cos(ang), std::sin(ang)};
  }
  t.kernel_fft.assign(m, cplx{0.0, 0.0});
  t.kernel_fft[0] = std::conj(t.chirp[0]);
  for (std::size_t j = 1; j < n; ++j) {
    const cplx b = std::conj(t.chirp[j]);
    t.kernel_fft[j] = b;
    t.kernel_fft[m - j] = b;
  }
  // Forward FFT of the kernel, done once. Recursion is safe: m is pow2.
  fft_pow2(t.kernel_fft.data(), m, -1);
  return bluestein_cache.emplace(n, std::move(t)).first->second;
}

// Arbitrary-n DFT via Bluestein's chirp-z identity:
//   X_k = conj(a_k) * sum_j (x_j a_j) conj(a_{k-j}),  a_j = e^{-i pi j^2 / n},
// i.e. a convolution evaluated with power-of-two FFTs.
void fft_bluestein(cplx* data, std::size_t n, int sign) {
  const BluesteinTables& t = bluestein_tables(n);
  const std::size_t m = t.m;
  std::vector<cplx> work(m, cplx{0.0, 0.0});
  for (std::size_t j = 0; j < n; ++j) {
    const cplx a = (sign < 0) ? t.chirp[j] : std::conj(t.chirp[j]);
    work[j] = data[j] * a;
  }
  fft_pow2(work.data(), m, -1);
  if (sign < 0) {
    for (std::size_t j = 0; j < m; ++j) work[j] *= t.kernel_fft[j];
  } else {
    // Inverse chirp kernel is the conjugate; its FFT is conj with index
    // reversal, but the kernel is symmetric so conjugation suffices.
    for (std::size_t j = 0; j < m; ++j) work[j] *= std::conj(t.kernel_fft[j]);
  }
  fft_pow2(work.data(), m, +1);
  const double inv_m = 1.0 / static_cast<double>(m);
  for (std::size_t k = 0; k < n; ++k) {
    const cplx a = (sign < 0) ? t.chirp[k] : std::conj(t.chirp[k]);
    data[k] = work[k] * a * inv_m;
  }
}

}  // namespace

bool is_pow2(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

void transform(cplx* data, std::size_t n, int sign) {
  if (n == 0) throw std::runtime_error("fft: empty transform");
  if (is_pow2(n)) {
    fft_pow2(data, n, sign);
  } else {
    fft_bluestein(data, n, sign);
  }
}

void transform_strided(cplx* data, std::size_t n, std::size_t stride, int sign,
                       std::vector<cplx>& scratch) {
  if (stride == 1) {
    transform(data, n, sign);
    return;
  }
  scratch.resize(n);
  for (std::size_t j = 0; j < n; ++j) scratch[j] = data[j * stride];
  transform(scratch.data(), n, sign);
  for (std::size_t j = 0; j < n; ++j) data[j * stride] = scratch[j];
}

}  // namespace kslab::fft
